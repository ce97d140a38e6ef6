fn main() {
    // CLI wired up after the pipeline lands.
}
