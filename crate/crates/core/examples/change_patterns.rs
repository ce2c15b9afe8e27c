//! Prints the change pattern assigned to every combination of short-window
//! and long-window CUSUM outcomes.
//!
//! Run with `cargo run --example change_patterns`.

use costdriver::patterns::characterize;
use costdriver::spc::Direction;

fn main() {
    let directions = [Direction::Up, Direction::Flat, Direction::Down];
    print!("{:<12}", "short\\long");
    for long in directions {
        print!("{:<22}", long.as_str());
    }
    println!();
    for short in directions {
        print!("{:<12}", short.as_str());
        for long in directions {
            print!("{:<22}", characterize(short, long).title());
        }
        println!();
    }
}
