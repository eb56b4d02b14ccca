use alloc::collections::BinaryHeap;
use core::cmp::{Ordering, Reverse};

use crate::numerology::Tick;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    PacketArrival,
    DlTxEnd,
    FeedbackDue,
    FeedbackTxEnd,
    RetxDue,
    ProcessDone,
    ProcessFailed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Event {
    pub time: Tick,
    pub sequence_no: u64,
    pub kind: EventKind,
    pub process_id: u64,
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.time, self.sequence_no).cmp(&(other.time, other.sequence_no))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Min-queue ordered by `(time, sequence_no)`; equal times pop in insertion order.
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Reverse<Event>>,
    next_seq: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, time: Tick, kind: EventKind, process_id: u64) -> u64 {
        let sequence_no = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse(Event {
            time,
            sequence_no,
            kind,
            process_id,
        }));
        sequence_no
    }

    pub fn pop(&mut self) -> Option<Event> {
        self.heap.pop().map(|Reverse(e)| e)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}
