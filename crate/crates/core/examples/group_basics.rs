//! Groups, elements, subgroups and cosets.

use popsum::group::enumerate_subgroups;
use popsum::{FiniteAbelianGroup, Result};

pub fn run_example() -> Result<()> {
    let g = FiniteAbelianGroup::parse("Z2xZ6")?;
    println!("{} has order {}", g.spec(), g.order());

    let x = g.element_from_components(&[1, 4])?;
    let y = g.element_from_components(&[1, 3])?;
    let sum = g.add(x, y);
    println!("{:?} + {:?} = {:?}", g.components(x), g.components(y), g.components(sum));
    assert_eq!(g.components(sum), vec![0, 1]);
    assert_eq!(g.element_order(x), 6);

    let subgroups = enumerate_subgroups(&g)?;
    println!("{} subgroups", subgroups.len());
    for h in &subgroups {
        println!("  |H| = {:2}  index {:2}  H = {}", h.order(), h.index(), h.members());
        assert_eq!(h.order() * h.index(), g.order());
        assert_eq!(h.coset_representatives().len(), h.index());
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
