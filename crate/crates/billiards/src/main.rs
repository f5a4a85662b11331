fn main() {
    std::process::exit(billiards::cli::run());
}
