//! Prints the canonical gait for three and for two slider groups.

use ovisim::gait::{canonical_schedule, validate_schedule};

fn main() {
    for (groups, stroke) in [(3, 10.0), (2, 5.0)] {
        let s = canonical_schedule(groups, stroke).expect("valid gait");
        assert!(validate_schedule(&s).is_ok());
        println!("{groups} groups, stroke {stroke} mm");
        print!("{}", s.table());
        println!();
    }
}
