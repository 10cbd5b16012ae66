//! The whole pipeline on a coarse configuration: Doppler and moment data,
//! solenoidal part, boundary potential, and the potential part on the box.
//!
//! cargo run --release --example full_recovery

use restray::harness::pipeline::run_level;
use restray::harness::PipelineConfig;

fn main() -> restray::Result<()> {
    env_logger::init();
    let cfg = PipelineConfig::default().refined(0, 3);
    let run = run_level(&cfg)?;
    print!("{}\n{}", run.sol.to_text(), run.full.to_text());
    Ok(())
}
