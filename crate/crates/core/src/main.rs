use clap::Parser;

fn main() {
    let outcome = toposdim::cli::execute(toposdim::cli::Cli::parse());
    print!("{}", outcome.stdout);
    eprint!("{}", outcome.stderr);
    std::process::exit(outcome.code);
}
