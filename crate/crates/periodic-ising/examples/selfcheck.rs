//! Run every acceptance check and print one line per criterion.
//!
//! cargo run --release --example selfcheck

fn main() {
    for r in periodic_ising::selfcheck::run_all(0) {
        println!("{r}");
    }
}
