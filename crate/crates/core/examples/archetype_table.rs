//! Prints the bundled archetype table and maps sample years to periods.

use ubem::archetypes::{assign_period, ArchetypePeriod, ArchetypeTable, Variant, DEFAULT_FALLBACK_PERIOD};

fn main() -> ubem::Result<()> {
    let table = ArchetypeTable::bundled();
    println!(
        "{:>12} {:>7} {:>7} {:>7} {:>7}  retrofit wall/window",
        "period", "wall", "roof", "floor", "window"
    );
    for p in ArchetypePeriod::ALL {
        let b = table.spec(p, Variant::Baseline);
        let r = table.spec(p, Variant::StandardRetrofit);
        println!(
            "{:>12} {:>7.2} {:>7.2} {:>7.2} {:>7.2}  {:.2}/{:.2}",
            p.label(),
            b.u_wall,
            b.u_roof,
            b.u_floor,
            b.u_window,
            r.u_wall,
            r.u_window
        );
    }
    for w in table.chronology_warnings() {
        println!("warning: {w}");
    }
    for year in [Some(1850), Some(1945), Some(1946), Some(2005), Some(2006), None] {
        println!("{year:?} -> {}", assign_period(year, DEFAULT_FALLBACK_PERIOD)?.label());
    }
    Ok(())
}
