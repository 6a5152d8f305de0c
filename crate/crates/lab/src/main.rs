fn main() {
    std::process::exit(rwqda_lab::cli::cli_main(std::env::args_os()));
}
