//! Lazy proximity iteration: users stream out of the network in
//! non-increasing order of their best path value, computed on demand.
//!
//!     cargo run --example proximity_iteration

use tagseek::graph::{ProximityFunction, SocialNetwork};
use tagseek::ids::Vocab;

fn main() -> tagseek::Result<()> {
    let mut vocab = Vocab::new();
    let mut net = SocialNetwork::new();
    let names = ["alice", "bob", "carol", "dave", "erin"];
    let ids: Vec<_> = names.iter().map(|n| vocab.user(n)).collect();
    // A ring with one chord; alice is the seeker.
    net.add_edge(ids[0], ids[1], 0.9)?;
    net.add_edge(ids[0], ids[2], 0.6)?;
    net.add_edge(ids[1], ids[3], 0.8)?;
    net.add_edge(ids[2], ids[4], 0.5)?;
    net.add_edge(ids[3], ids[4], 0.4)?;

    for f in [
        ProximityFunction::Mul,
        ProximityFunction::Min,
        ProximityFunction::Pow { lambda: 2.0 },
    ] {
        println!("{f:?}");
        let mut it = net.proximity_iter(ids[0], f)?;
        // peek_top tells the engine how good the next user CAN be before
        // paying for the pop; it is the optimism multiplier in the bounds.
        while !it.is_exhausted() {
            let next_best = it.peek_top();
            let (user, sigma) = it.next_user().expect("not exhausted");
            println!(
                "  {:8} sigma {:.4}  (peeked {:.4})",
                vocab.user_name(user),
                sigma,
                next_best
            );
        }
        println!();
    }
    Ok(())
}
