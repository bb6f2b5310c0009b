fn main() {
    std::process::exit(vantage_io::cli::run());
}
