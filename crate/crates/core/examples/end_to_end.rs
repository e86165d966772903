//! Every stage from synthetic inputs to the report bundle in one output directory.
//!
//! cargo run --release --example end_to_end -- [out_dir] [buildings]

use ubem::config::PipelineConfig;
use ubem::stages;

fn main() -> ubem::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next().unwrap_or_else(|| "out_end_to_end".into());
    let mut cfg = PipelineConfig {
        output_dir: out.into(),
        ..PipelineConfig::default()
    };
    if let Some(n) = args.next().and_then(|s| s.parse().ok()) {
        cfg.synth.n_buildings = n;
    }
    cfg.validate()?;
    for report in stages::run_chain(&cfg)? {
        println!("{report}");
    }
    println!("{}", stages::sensitivity(&cfg)?);
    // Reporting again folds the elbow radius into the summary.
    println!("{}", stages::report(&cfg)?);
    Ok(())
}
