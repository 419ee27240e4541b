fn main() {
    std::process::exit(qloc::cli::run());
}
