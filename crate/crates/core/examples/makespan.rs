//! Cluster makespan across node counts and shading radii from a linear cost model.

use std::collections::BTreeMap;

use ubem::orchestrator::{
    neighbor_counts, radius_key, scaling_surface, CostModel, SchedulePolicy, DEFAULT_CORES_PER_NODE,
};
use ubem::synthcity::{self, SynthConfig};

fn main() -> ubem::Result<()> {
    let records = synthcity::generate(&SynthConfig {
        n_buildings: 5000,
        rasters: false,
        ..SynthConfig::default()
    })?
    .records()?;
    let radii = [10.0, 30.0, 60.0, 100.0];
    let counts: BTreeMap<u64, Vec<usize>> = radii
        .iter()
        .map(|&r| (radius_key(r), neighbor_counts(&records, r)))
        .collect();
    for policy in [SchedulePolicy::Lpt, SchedulePolicy::Fifo] {
        println!("{policy:?}");
        let rows = scaling_surface(
            &counts,
            &[1, 2, 4, 6, 8, 10],
            DEFAULT_CORES_PER_NODE,
            &CostModel::default(),
            policy,
        )?;
        for row in rows {
            println!(
                "  r={:>5.0} nodes={:>2} makespan={:>8.0} s floor={:>5.0} s",
                row.radius_m, row.nodes, row.makespan_s, row.baseline_s
            );
        }
    }
    Ok(())
}
