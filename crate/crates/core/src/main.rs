fn main() {
    std::process::exit(dispwave::cli::run_command(std::env::args_os()));
}
