//! Cycle-stepped reference arbiter, independent of the production
//! scheduler. Each cycle it scans the requests in order and grants one
//! when its bank and channel are both idle and no earlier still-pending
//! request wants either resource. Grants within a cycle see each other.

use std::collections::HashMap;

const PENDING: u32 = u32::MAX;

/// `reqs` are (bank, channel) pairs in arrival order; returns per-request
/// start cycles.
pub fn schedule(reqs: &[(u32, u32)], latency: u32) -> Vec<u32> {
    assert!(latency > 0);
    let mut start = vec![PENDING; reqs.len()];
    let mut bank_busy: HashMap<u32, u32> = HashMap::new();
    let mut chan_busy: HashMap<u32, u32> = HashMap::new();
    let mut granted = 0;
    let mut now = 0u32;
    while granted < reqs.len() {
        assert!(now < 1_000_000, "reference arbiter runaway");
        for i in 0..reqs.len() {
            if start[i] != PENDING {
                continue;
            }
            let (bank, chan) = reqs[i];
            let bank_free = bank_busy.get(&bank).copied().unwrap_or(0) <= now;
            let chan_free = chan_busy.get(&chan).copied().unwrap_or(0) <= now;
            let earlier_blocks = reqs[..i]
                .iter()
                .enumerate()
                .any(|(j, &(b, c))| start[j] == PENDING && (b == bank || c == chan));
            if bank_free && chan_free && !earlier_blocks {
                start[i] = now;
                bank_busy.insert(bank, now + latency);
                chan_busy.insert(chan, now + latency);
                granted += 1;
            }
        }
        now += 1;
    }
    start
}
