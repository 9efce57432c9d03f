fn main() {
    std::process::exit(wavesde::cli::main());
}
