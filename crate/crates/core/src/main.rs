fn main() {
    std::process::exit(patchbif::cli::run(std::env::args_os()));
}
