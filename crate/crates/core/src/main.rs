fn main() {
    std::process::exit(gstamp_core::cli::run(std::env::args_os()));
}
