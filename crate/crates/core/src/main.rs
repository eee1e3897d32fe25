fn main() {
    std::process::exit(hkreduce::cli::cli_main(std::env::args_os()));
}
