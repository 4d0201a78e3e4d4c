fn main() {
    std::process::exit(emopool::cli::run(std::env::args_os()));
}
