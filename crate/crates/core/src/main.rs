fn main() {
    std::process::exit(motmask::cli::run(std::env::args_os()));
}
