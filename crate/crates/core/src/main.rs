fn main() {
    std::process::exit(graphkern::cli::main());
}
