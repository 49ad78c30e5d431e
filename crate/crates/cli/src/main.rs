fn main() {
    fairsel::run()
}
