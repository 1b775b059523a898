//! Pollard, Kneser, Cauchy-Davenport and Hamidoune-Serra on small instances.

use popsum::literal::parse_set;
use popsum::theorems::{check_cauchy_davenport, check_hamidoune_serra, check_kneser, check_pollard, BoundReport};
use popsum::{FiniteAbelianGroup, Result};

fn show(r: &BoundReport) {
    let side = |q| serde_json::to_string(&q).expect("quantity serializes");
    println!("{:>8}: {} >= {}  {:?}", r.theorem.name(), side(r.lhs), side(r.rhs), r.verdict);
}

pub fn run_example() -> Result<()> {
    let z7 = FiniteAbelianGroup::parse("Z7")?;
    let a = parse_set(&z7, "{0,1,2}")?;
    let b = parse_set(&z7, "{0,3,4}")?;
    for t in 1..=3 {
        let r = check_pollard(&a, &b, t)?;
        show(&r);
        assert!(r.holds());
    }
    show(&check_cauchy_davenport(&a, &b)?);

    let z8 = FiniteAbelianGroup::parse("Z8")?;
    let a = parse_set(&z8, "{0,1,4,5}")?;
    let b = parse_set(&z8, "{0,4}")?;
    let kneser = check_kneser(&a, &b)?;
    show(&kneser);
    assert!(kneser.holds());
    show(&check_hamidoune_serra(&a, &b, 2)?);

    println!("{}", serde_json::to_string_pretty(&kneser).expect("report serializes"));
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
