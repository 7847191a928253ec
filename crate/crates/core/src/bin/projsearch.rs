fn main() {
    std::process::exit(projsearch_core::cli::cli_main(std::env::args_os()));
}
