fn main() {
    std::process::exit(subsetsum_cli::run());
}
