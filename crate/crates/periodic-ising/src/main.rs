fn main() {
    std::process::exit(periodic_ising::cli::run());
}
