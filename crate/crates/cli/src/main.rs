fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let outcome = jcond_cli::execute(&args);
    if !outcome.stdout.is_empty() {
        print!("{}", outcome.stdout);
    }
    if !outcome.stderr.is_empty() {
        eprint!("{}", outcome.stderr);
    }
    std::process::exit(outcome.code);
}
