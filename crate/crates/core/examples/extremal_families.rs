//! Extremal families and the conjectured lower bound on them.

use popsum::constructions::{gen_ap_cosets, gen_kneser_pair, gen_minus_self, gen_recursive_1, inner_pairs, Construction};
use popsum::literal::parse_set;
use popsum::theorems::check_conjecture;
use popsum::witness::find_conjecture_witness;
use popsum::{FiniteAbelianGroup, Result, Subgroup};

fn summarize(c: &Construction) -> Result<()> {
    let r = c.report();
    let conj = check_conjecture(&c.a, &c.b, c.t(), find_conjecture_witness(&c.a, &c.b, c.t())?.as_ref())?;
    println!(
        "{:<12} t={} |A|={} |B|={} predicted={} direct={} conjecture {:?} >= {:?}",
        r.spec.family.name(),
        c.t(),
        c.a.len(),
        c.b.len(),
        r.spec.predicted_sum,
        r.direct_sum,
        conj.lhs,
        conj.rhs
    );
    if let Some(d) = &r.discrepancy {
        println!("{:<12} printed {} = {}, off by {}", "", d.printed_form, d.printed_value, d.difference);
    }
    assert!(r.matches && !conj.violated());
    Ok(())
}

pub fn run_example() -> Result<()> {
    let z8 = FiniteAbelianGroup::parse("Z8")?;
    summarize(&gen_minus_self(&z8, &Subgroup::from_set(parse_set(&z8, "{0,4}")?)?, 1, 1)?)?;

    let z12 = FiniteAbelianGroup::parse("Z12")?;
    let h = Subgroup::from_set(parse_set(&z12, "{0,4,8}")?)?;
    summarize(&gen_ap_cosets(&z12, &h, 0, 2, 2, 2)?)?;
    summarize(&gen_kneser_pair(&z12, &Subgroup::from_set(parse_set(&z12, "{0,3,6,9}")?)?, 2, 2, 1)?)?;

    let z16 = FiniteAbelianGroup::parse("Z16")?;
    let k = Subgroup::from_set(parse_set(&z16, "{0,4,8,12}")?)?;
    let base = gen_minus_self(&z16, &k, 1, 2)?;
    let (a0, b0) = inner_pairs(&k, 2).remove(0);
    summarize(&gen_recursive_1(&base, &a0, &b0)?)?;
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
