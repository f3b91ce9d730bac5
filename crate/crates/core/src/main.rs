use clap::Parser;
use wedge_vortex::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
