fn main() {
    std::process::exit(twinway::cli::cli_main(std::env::args_os()));
}
