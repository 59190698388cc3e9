fn main() {
    std::process::exit(pstab::cli::dispatch(std::env::args_os()));
}
