//! Representation profiles, popular sumsets and the stabilizer.

use popsum::algebra::{dot_grid_stats, rep_profile, stabilizer, sumset};
use popsum::literal::parse_set;
use popsum::{FiniteAbelianGroup, Result};

pub fn run_example() -> Result<()> {
    let g = FiniteAbelianGroup::parse("Z12")?;
    let a = parse_set(&g, "{0,1,4,5,8,9}")?;
    let b = parse_set(&g, "{0,4,8}")?;

    let profile = rep_profile(&a, &b);
    println!("r(g) = {:?}", profile.counts());
    println!("A+B = {}, stabilizer {}", sumset(&a, &b), stabilizer(&sumset(&a, &b)).members());
    for t in 1..=3 {
        println!("A +_{t} B = {}  (size {})", profile.popular_sumset(t), profile.popular_sumset(t).len());
    }
    println!("sum_(i<=2) |A +_i B| = {}", profile.popular_sum(2));
    assert_eq!(profile.popular_sum(2), 12);

    let grid = dot_grid_stats(&a, &b, 2)?;
    assert!(grid.holes_identity(a.len(), b.len(), 2) && grid.edge_identity(2));
    println!("dot grid: |X| = {}, holes = {}, edges = {}", grid.x.len(), grid.y, grid.edge_count);
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
