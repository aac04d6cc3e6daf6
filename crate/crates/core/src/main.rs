fn main() {
    std::process::exit(pathtomo::cli::dispatch(std::env::args_os()));
}
