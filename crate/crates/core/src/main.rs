fn main() {
    std::process::exit(nnlif::cli::run(std::env::args_os()));
}
