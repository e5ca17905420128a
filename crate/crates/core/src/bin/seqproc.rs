fn main() {
    std::process::exit(seqproc::cli::run(std::env::args_os()));
}
