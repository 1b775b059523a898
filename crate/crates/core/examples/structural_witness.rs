//! Structural witness `(A', B')` search and the canonical-witness items.

use num_rational::Ratio;
use popsum::literal::parse_set;
use popsum::theorems::{check_mainprop_items, check_theorem_new};
use popsum::witness::{find_witness, WitnessSearch};
use popsum::{FiniteAbelianGroup, Result};

pub fn run_example() -> Result<()> {
    let g = FiniteAbelianGroup::parse("Z12")?;
    let b = parse_set(&g, "{0,4,8}")?;
    for a_text in ["{0,1,4,5,8,9}", "{0,1,2,4,5,8,9}"] {
        let a = parse_set(&g, a_text)?;
        let WitnessSearch::Found { witness, report } = find_witness(&a, &b, 2)? else {
            panic!("hypothesis holds, a witness must exist");
        };
        println!(
            "A = {a}: A' = {}, B' = {}, l = {}, |H| = {}, valid = {}",
            witness.a_prime, witness.b_prime, report.ell, report.h.len(), report.valid
        );
        assert!(report.valid);

        let theorem = check_theorem_new(&a, &b, 2, Some(&witness))?;
        assert!(theorem.holds());
        let items = check_mainprop_items(&a, &b, 2, &witness.a_prime, &witness.b_prime, Ratio::from_integer(0))?;
        for c in &items.clauses {
            println!("    {:<6} {}", c.name, if c.holds { "ok" } else { "FAILED" });
        }
        assert!(items.holds());
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
