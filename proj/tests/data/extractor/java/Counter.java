package demo;

public class Counter {
    private int count;

    public void tick() {
        // increment the counter
        count++;
    }
}
