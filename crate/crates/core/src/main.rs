fn main() {
    let (code, output) = borel_sseq::cli::run(std::env::args_os());
    if code == borel_sseq::cli::EXIT_USAGE {
        eprint!("{output}");
    } else {
        print!("{output}");
    }
    std::process::exit(code);
}
