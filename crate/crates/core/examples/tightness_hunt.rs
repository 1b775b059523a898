//! Instances sitting exactly on the hypothesis threshold with no witness.

use popsum::search::{hunt_tightness, replay};
use popsum::Result;

pub fn run_example() -> Result<()> {
    let groups: Vec<String> = ["Z6", "Z8", "Z2xZ4", "Z9"].iter().map(|s| s.to_string()).collect();
    for t in [2, 3] {
        let found = hunt_tightness(&groups, t, 1)?;
        println!("t = {t}: {} tightness instances", found.len());
        for f in found.iter().take(3) {
            println!("  {} A = {:?} B = {:?}", f.group, f.a, f.b);
            assert!(replay(f)?);
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
