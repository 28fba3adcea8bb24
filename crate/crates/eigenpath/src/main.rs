fn main() {
    std::process::exit(eigenpath::run());
}
