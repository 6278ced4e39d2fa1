public class IfElse {
    int sign(int v) {
        int r = 0;
        // check positive
        if (v > 0) {
            r = 1;
        } else {
            r = -1;
        }
        return r;
    }
}
