//! A checkpointed exhaustive scan, interrupted and resumed.

use popsum::search::{scan, scan_range, Goal, ScanJob, ScanOptions};
use popsum::Result;

pub fn run_example() -> Result<()> {
    let job = ScanJob::exhaustive(&["Z5", "Z6", "Z2xZ4"], &[2, 3], Goal::VerifyAll);
    let dir = std::env::temp_dir().join(format!("popsum-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let checkpoint = dir.join("scan.ckpt");
    let _ = std::fs::remove_file(&checkpoint);

    let mut opts = ScanOptions { workers: 2, batch: 16, checkpoint: Some(checkpoint.clone()), stop_after: Some(40) };
    let partial = scan(&job, &opts, &mut |f| {
        println!("{}", serde_json::to_string(f)?);
        Ok(())
    })?;
    println!("stopped at unit {} of {}", partial.cursor, partial.units);

    opts.stop_after = None;
    let done = scan(&job, &opts, &mut |f| {
        println!("{}", serde_json::to_string(f)?);
        Ok(())
    })?;
    println!("{}", serde_json::to_string(&done)?);

    let (_, unsplit) = scan_range(&job, 0..u64::MAX, 1)?;
    assert!(done.complete && done.counts == unsplit && done.violations() == 0);
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
