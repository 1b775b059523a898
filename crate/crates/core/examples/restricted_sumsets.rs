//! Restricted sumsets under random injective maps.

use popsum::literal::parse_set;
use popsum::restricted::{check_restricted, crossover_threshold, TauMap};
use popsum::{FiniteAbelianGroup, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<()> {
    let g = FiniteAbelianGroup::parse("Z7")?;
    let a = parse_set(&g, "{0,1,2,3,5}")?;
    let b = parse_set(&g, "{0,2,3,6}")?;

    let identity = check_restricted(&a, &b, &TauMap::identity(&a))?;
    println!("identity: |A ⊕ B| = {} (Lev rhs {:.3}, new rhs {:.3})", identity.size, identity.lev_rhs, identity.new_rhs);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut smallest = usize::MAX;
    for _ in 0..200 {
        let r = check_restricted(&a, &b, &TauMap::random(&a, &mut rng))?;
        assert!(r.all_hold());
        smallest = smallest.min(r.size);
    }
    println!("smallest over 200 random maps: {smallest}");
    println!("the new bound beats Lev's when M < {:.3}", crossover_threshold(g.order()));
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
