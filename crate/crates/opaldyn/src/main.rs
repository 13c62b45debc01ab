fn main() {
    std::process::exit(opaldyn::cli::run());
}
