use clap::Parser;
use hypflow_cli::{dispatch, exit_code, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command, &cli.config, &cli.out, cli.plot) {
        Ok(summary) => print!("{summary}"),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(exit_code(&e));
        }
    }
}
