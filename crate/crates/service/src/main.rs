use clap::Parser;

fn main() -> anyhow::Result<()> {
    taskalloc_service::cli::run(taskalloc_service::cli::Cli::parse())
}
