fn main() {
    std::process::exit(resonance::cli::main());
}
