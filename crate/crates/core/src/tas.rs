//! Per-egress-port 802.1Qbv time-aware shaper.
//!
//! Eight gated FIFO queues indexed by traffic class, driven by a cyclic
//! [`GateControlList`]. Transmission selection is length-aware and
//! non-preemptive: a frame starts only when its whole transmission fits in
//! the gate's remaining contiguous open run, and among eligible queues the
//! highest class index wins.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use crate::model::gcl::{GateControlList, GclError, OpenRun};
use crate::model::stream::{transmission_time, Frame};
use crate::model::topology::PortId;
use crate::time::TimeNs;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum TasError {
    #[error("queue {class} full (capacity {capacity})")]
    QueueOverflow { class: u8, capacity: usize },
    #[error(transparent)]
    Gcl(#[from] GclError),
}

/// A planned transmission returned by [`EgressPort::peek_next_transmission`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlannedTx {
    pub class: u8,
    pub start: TimeNs,
    pub finish: TimeNs,
}

/// One egress port: eight class queues, a gate program and the attached
/// link's rate.
#[derive(Clone, Debug)]
pub struct EgressPort {
    pub id: PortId,
    queues: [VecDeque<Frame>; 8],
    gcl: GateControlList,
    link_rate: u64,
    /// Per-queue frame capacity; `None` means unbounded (the default).
    capacity: Option<usize>,
}

impl EgressPort {
    pub fn new(id: PortId, gcl: GateControlList, link_rate: u64) -> Self {
        EgressPort {
            id,
            queues: Default::default(),
            gcl,
            link_rate,
            capacity: None,
        }
    }

    pub fn with_capacity(mut self, capacity: usize) -> Self {
        self.capacity = Some(capacity);
        self
    }

    pub fn gcl(&self) -> &GateControlList {
        &self.gcl
    }

    pub fn link_rate(&self) -> u64 {
        self.link_rate
    }

    pub fn queue_len(&self, class: u8) -> usize {
        self.queues[class as usize].len()
    }

    pub fn is_empty(&self) -> bool {
        self.queues.iter().all(VecDeque::is_empty)
    }

    /// Append `frame` to the queue of its traffic class, preserving FIFO
    /// order within the queue.
    pub fn enqueue(&mut self, frame: Frame) -> Result<(), TasError> {
        let class = frame.traffic_class;
        debug_assert!(class <= 7);
        let queue = &mut self.queues[class as usize];
        if let Some(cap) = self.capacity {
            if queue.len() >= cap {
                return Err(TasError::QueueOverflow {
                    class,
                    capacity: cap,
                });
            }
        }
        queue.push_back(frame);
        Ok(())
    }

    fn tx_time(&self, frame: &Frame) -> TimeNs {
        transmission_time(frame.size, self.link_rate)
    }

    /// Highest-priority queue eligible to transmit exactly at `t`, if any.
    ///
    /// Eligible means: queue non-empty, gate open at `t`, and the head
    /// frame's transmission fits in the remaining contiguous open run.
    fn eligible_at(&self, t: TimeNs) -> Result<Option<PlannedTx>, GclError> {
        for class in (0..8u8).rev() {
            let Some(head) = self.queues[class as usize].front() else {
                continue;
            };
            let tx = self.tx_time(head);
            let fits = match self.gcl.open_run(class, t)? {
                OpenRun::Closed => false,
                OpenRun::Until(end) => t + tx <= end,
                OpenRun::Unbounded => true,
            };
            if fits {
                return Ok(Some(PlannedTx {
                    class,
                    start: t,
                    finish: t + tx,
                }));
            }
        }
        Ok(None)
    }

    /// Earliest transmission that could start at or after `t` with the
    /// queues as they are now. Scans one full gate cycle; `None` means no
    /// queued frame can transmit within it.
    ///
    /// Within a contiguous open run eligibility only decays as time
    /// advances, so candidate start instants are `t` itself and the gate
    /// entry boundaries that follow it.
    pub fn peek_next_transmission(&self, t: TimeNs) -> Result<Option<PlannedTx>, GclError> {
        if self.is_empty() {
            return Ok(None);
        }
        let horizon = t + self.gcl.cycle_time();
        let mut candidate = t;
        loop {
            if let Some(planned) = self.eligible_at(candidate)? {
                return Ok(Some(planned));
            }
            candidate = self.gcl.next_boundary_after(candidate)?;
            if candidate > horizon {
                return Ok(None);
            }
        }
    }

    /// Commit the transmission planned by [`Self::peek_next_transmission`]:
    /// remove the head frame of the selected queue.
    pub fn commit(&mut self, planned: PlannedTx) -> Frame {
        self.queues[planned.class as usize]
            .pop_front()
            .expect("committed queue is non-empty")
    }

    /// Select, dequeue and return the next frame to transmit at or after
    /// `t`, with its start and finish instants.
    pub fn next_transmission(
        &mut self,
        t: TimeNs,
    ) -> Result<Option<(Frame, TimeNs, TimeNs)>, GclError> {
        match self.peek_next_transmission(t)? {
            None => Ok(None),
            Some(planned) => {
                let frame = self.commit(planned);
                Ok(Some((frame, planned.start, planned.finish)))
            }
        }
    }
}

/// A completed transmission through one port.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TxRecord {
    pub frame: Frame,
    pub start: TimeNs,
    pub finish: TimeNs,
}

/// Event-driven replay of an arrival trace through a single port.
///
/// The port is re-evaluated at every arrival, at every planned start and at
/// every transmission completion, so a frame arriving between a plan and its
/// start instant can still win the port (selection is decided at the start
/// instant itself, not when the plan was made). Frames that can never fit a
/// gate window remain queued and are not reported.
pub fn replay_arrivals(
    mut port: EgressPort,
    arrivals: &[(Frame, TimeNs)],
) -> Result<Vec<TxRecord>, TasError> {
    #[derive(PartialEq, Eq, PartialOrd, Ord)]
    enum Ev {
        Arrival(usize),
        Kick,
    }

    let mut heap: BinaryHeap<Reverse<(TimeNs, u64, Ev)>> = BinaryHeap::new();
    let mut seq = 0u64;
    for (i, (_, t)) in arrivals.iter().enumerate() {
        heap.push(Reverse((*t, seq, Ev::Arrival(i))));
        seq += 1;
    }

    let mut busy_until = TimeNs::ZERO;
    let mut out = Vec::new();
    while let Some(Reverse((t, _, ev))) = heap.pop() {
        match ev {
            Ev::Arrival(i) => {
                port.enqueue(arrivals[i].0.clone())?;
                heap.push(Reverse((t.max(busy_until), seq, Ev::Kick)));
                seq += 1;
            }
            Ev::Kick => {
                if t < busy_until {
                    heap.push(Reverse((busy_until, seq, Ev::Kick)));
                    seq += 1;
                    continue;
                }
                match port.peek_next_transmission(t)? {
                    None => {}
                    Some(planned) if planned.start == t => {
                        let frame = port.commit(planned);
                        busy_until = planned.finish;
                        out.push(TxRecord {
                            frame,
                            start: planned.start,
                            finish: planned.finish,
                        });
                        heap.push(Reverse((planned.finish, seq, Ev::Kick)));
                        seq += 1;
                    }
                    Some(planned) => {
                        heap.push(Reverse((planned.start, seq, Ev::Kick)));
                        seq += 1;
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::gcl::GclEntry;
    use crate::model::GIGABIT;

    fn frame(class: u8, seq: u64, size: u32) -> Frame {
        Frame {
            stream_id: class as u32,
            seq,
            size,
            traffic_class: class,
            release_time: TimeNs::ZERO,
        }
    }

    /// Gate for class 0 open over [100us, 300us) of a 1ms cycle.
    fn window_gcl() -> GateControlList {
        GateControlList::new(
            TimeNs::ZERO,
            TimeNs::from_ms(1),
            vec![
                GclEntry::new(0x00, TimeNs::from_us(100)),
                GclEntry::new(0x01, TimeNs::from_us(200)),
                GclEntry::new(0x00, TimeNs::from_us(700)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn waits_for_gate_to_open() {
        let mut port = EgressPort::new(PortId::new("B1", "B2"), window_gcl(), GIGABIT);
        port.enqueue(frame(0, 0, 1500)).unwrap();
        let (f, start, finish) = port.next_transmission(TimeNs::ZERO).unwrap().unwrap();
        assert_eq!(f.seq, 0);
        assert_eq!(start, TimeNs::from_us(100));
        assert_eq!(finish, TimeNs::from_us(112));
    }

    #[test]
    fn length_aware_gating_never_truncates() {
        // 10us window, 12us transmission: the frame can never pass.
        let gcl = GateControlList::new(
            TimeNs::ZERO,
            TimeNs::from_ms(1),
            vec![
                GclEntry::new(0x01, TimeNs::from_us(10)),
                GclEntry::new(0x00, TimeNs::from_us(990)),
            ],
        )
        .unwrap();
        let mut port = EgressPort::new(PortId::new("B1", "B2"), gcl, GIGABIT);
        port.enqueue(frame(0, 0, 1500)).unwrap();
        assert_eq!(port.next_transmission(TimeNs::ZERO).unwrap(), None);
        assert_eq!(port.queue_len(0), 1);

        // Widen the window to 20us and the same frame passes at its start.
        let gcl = GateControlList::new(
            TimeNs::ZERO,
            TimeNs::from_ms(1),
            vec![
                GclEntry::new(0x01, TimeNs::from_us(20)),
                GclEntry::new(0x00, TimeNs::from_us(980)),
            ],
        )
        .unwrap();
        let mut port = EgressPort::new(PortId::new("B1", "B2"), gcl, GIGABIT);
        port.enqueue(frame(0, 0, 1500)).unwrap();
        let (_, start, finish) = port.next_transmission(TimeNs::ZERO).unwrap().unwrap();
        assert_eq!(start, TimeNs::ZERO);
        assert_eq!(finish, TimeNs::from_us(12));
    }

    #[test]
    fn strict_priority_prefers_higher_class() {
        let gcl = GateControlList::always_open(TimeNs::ZERO, TimeNs::from_ms(1));
        let mut port = EgressPort::new(PortId::new("B1", "B2"), gcl, GIGABIT);
        port.enqueue(frame(2, 0, 500)).unwrap();
        port.enqueue(frame(5, 0, 500)).unwrap();
        assert_eq!(port.queue_len(2), 1);
        assert_eq!(port.queue_len(5), 1);
        let (f, _, _) = port.next_transmission(TimeNs::ZERO).unwrap().unwrap();
        assert_eq!(f.traffic_class, 5);
        let (f, _, _) = port.next_transmission(TimeNs::from_us(4)).unwrap().unwrap();
        assert_eq!(f.traffic_class, 2);
    }

    #[test]
    fn fifo_order_within_a_queue() {
        let gcl = GateControlList::always_open(TimeNs::ZERO, TimeNs::from_ms(1));
        let mut port = EgressPort::new(PortId::new("B1", "B2"), gcl, GIGABIT);
        port.enqueue(frame(2, 0, 500)).unwrap();
        port.enqueue(frame(2, 1, 500)).unwrap();
        let (f0, _, _) = port.next_transmission(TimeNs::ZERO).unwrap().unwrap();
        let (f1, _, _) = port.next_transmission(TimeNs::from_us(4)).unwrap().unwrap();
        assert_eq!((f0.seq, f1.seq), (0, 1));
    }

    #[test]
    fn bounded_queue_overflows() {
        let gcl = GateControlList::always_open(TimeNs::ZERO, TimeNs::from_ms(1));
        let mut port = EgressPort::new(PortId::new("B1", "B2"), gcl, GIGABIT).with_capacity(1);
        port.enqueue(frame(1, 0, 500)).unwrap();
        assert_eq!(
            port.enqueue(frame(1, 1, 500)),
            Err(TasError::QueueOverflow {
                class: 1,
                capacity: 1
            })
        );
    }

    #[test]
    fn replay_lets_late_high_class_arrival_win() {
        // Class 0 queued at t=0 for a window opening at 100us; a class-5
        // frame arriving at 50us (same window) must transmit first.
        let gcl = GateControlList::new(
            TimeNs::ZERO,
            TimeNs::from_ms(1),
            vec![
                GclEntry::new(0x00, TimeNs::from_us(100)),
                GclEntry::new(0xFF, TimeNs::from_us(900)),
            ],
        )
        .unwrap();
        let port = EgressPort::new(PortId::new("B1", "B2"), gcl, GIGABIT);
        let records = replay_arrivals(
            port,
            &[
                (frame(0, 0, 1500), TimeNs::ZERO),
                (frame(5, 0, 1500), TimeNs::from_us(50)),
            ],
        )
        .unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].frame.traffic_class, 5);
        assert_eq!(records[0].start, TimeNs::from_us(100));
        assert_eq!(records[1].frame.traffic_class, 0);
        assert_eq!(records[1].start, TimeNs::from_us(112));
    }

    #[test]
    fn replay_keeps_port_busy_during_transmission() {
        let gcl = GateControlList::always_open(TimeNs::ZERO, TimeNs::from_ms(1));
        let port = EgressPort::new(PortId::new("h1", "B1"), gcl, GIGABIT);
        let records = replay_arrivals(
            port,
            &[
                (frame(1, 0, 1500), TimeNs::ZERO),
                (frame(1, 1, 1500), TimeNs::from_us(1)),
            ],
        )
        .unwrap();
        assert_eq!(records[0].start, TimeNs::ZERO);
        assert_eq!(records[0].finish, TimeNs::from_us(12));
        // Second frame waits for the port, not the gate.
        assert_eq!(records[1].start, TimeNs::from_us(12));
    }
}
