//! Recovers the solenoidal part of the default phantom from restricted
//! Doppler data on a coarse configuration (about a minute on one core).
//!
//! cargo run --release --example solenoidal_recovery

use restray::harness::pipeline::{forward, phantom_fields, recon_sol, sol_report};
use restray::harness::PipelineConfig;

fn main() -> restray::Result<()> {
    env_logger::init();
    let cfg = PipelineConfig::default().refined(0, 3);
    let ph = cfg.phantom.build();
    let data = forward(&cfg, ph.as_ref())?;
    let sol = recon_sol(&cfg, &data.doppler)?;
    print!("{}", sol_report(&cfg, &sol, &phantom_fields(&cfg, ph.as_ref())).to_text());
    Ok(())
}
