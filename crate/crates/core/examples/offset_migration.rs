//! Solves proportional migration flows between treatments that lost volume
//! and comparable treatments that gained it, and prices the switch.
//!
//! Run with `cargo run --example offset_migration`.

use std::error::Error;

use costdriver::offsets::{compute_migration, offset_cost_impact, OffsetNetwork, OffsetNode};

fn main() -> Result<(), Box<dyn Error>> {
    // Two inhalers lost units; one newer, costlier inhaler gained fewer
    // units than they lost together.
    let originators = vec![
        OffsetNode::new("Albuterol", 300.0).priced(30.0),
        OffsetNode::new("Ipratropium", 100.0).priced(45.0),
    ];
    let receivers = vec![OffsetNode::new("Levalbuterol", 240.0).priced(60.0)];
    let network = OffsetNetwork::complete(originators, receivers)?;

    let flows = compute_migration(&network)?;
    println!("total migrated volume {:.1}", flows.total);
    for f in &flows.flows {
        println!(
            "  {:<12} -> {:<12} {:>7.1}",
            network.originators[f.from].treatment, network.receivers[f.to].treatment, f.volume
        );
    }

    let member_months = 12_000.0;
    let pmpm = offset_cost_impact(&network, &flows, member_months)?;
    println!("cost of switching over {member_months} member-months: {pmpm:+.4} PMPM");
    Ok(())
}
