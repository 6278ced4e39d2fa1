public class Javadoc {
    /**
     * Documented method.
     */
    public int size() {
        /* block comment */
        return 0;
    }
}
