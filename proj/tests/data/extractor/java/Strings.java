public class Strings {
    String url = "http://example.com"; // endpoint
    String s = "/* not a comment */";
    char c = '/';
    String t = "a // b";
}
