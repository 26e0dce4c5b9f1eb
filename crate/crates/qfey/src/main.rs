fn main() {
    std::process::exit(qfey::cli::run());
}
