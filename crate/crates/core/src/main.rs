fn main() {
    std::process::exit(gegenbauer_markov::cli::run(std::env::args_os()));
}
