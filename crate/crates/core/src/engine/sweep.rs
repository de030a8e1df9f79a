//! Descending-score activation of frames, maintaining the set of detections
//! (maximal positive runs) as the threshold falls through each distinct score.

use std::collections::BTreeMap;

use crate::scalar::Scalar;

pub(crate) type DetId = u32;

/// Detections that disappeared and appeared when the threshold fell below `score`.
pub(crate) struct GroupChange<T> {
    pub score: T,
    /// Detections alive before this group and gone after it.
    pub removed: Vec<DetId>,
    /// Detections created by this group and alive after it, ordered by start frame.
    pub added: Vec<DetId>,
}

pub(crate) struct Sweep<'a, T> {
    column: &'a [T],
    order: Vec<usize>,
    pos: usize,
    /// start frame -> (end frame inclusive, id)
    dets: BTreeMap<usize, (usize, DetId)>,
    spans: Vec<(usize, usize)>,
    alive: Vec<bool>,
}

impl<'a, T: Scalar> Sweep<'a, T> {
    pub fn new(column: &'a [T]) -> Self {
        let mut order: Vec<usize> = (0..column.len()).collect();
        order.sort_by(|&a, &b| column[b].total_cmp_scalar(&column[a]).then(a.cmp(&b)));
        Self {
            column,
            order,
            pos: 0,
            dets: BTreeMap::new(),
            spans: Vec::with_capacity(column.len()),
            alive: Vec::with_capacity(column.len()),
        }
    }

    /// Inclusive frame span of a detection.
    pub fn span(&self, id: DetId) -> (usize, usize) {
        self.spans[id as usize]
    }

    pub fn num_ids(&self) -> usize {
        self.spans.len()
    }

    /// Whether `id` existed before the current group and still exists.
    pub fn is_alive(&self, id: DetId) -> bool {
        self.alive[id as usize]
    }

    /// Detections with a start frame in `frames`, ascending.
    pub fn starting_in(&self, frames: std::ops::Range<usize>) -> impl Iterator<Item = (usize, usize, DetId)> + '_ {
        self.dets.range(frames).map(|(&s, &(e, id))| (s, e, id))
    }

    /// Detections covering at least one frame of `frames`, ascending.
    pub fn covering(&self, frames: std::ops::Range<usize>) -> impl Iterator<Item = (usize, usize, DetId)> + '_ {
        let head = self
            .dets
            .range(..frames.start)
            .next_back()
            .filter(|(_, &(e, _))| e >= frames.start && frames.start < frames.end)
            .map(|(&s, &(e, id))| (s, e, id));
        head.into_iter().chain(self.starting_in(frames))
    }

    fn create(&mut self, start: usize, end: usize) -> DetId {
        let id = self.spans.len() as DetId;
        self.spans.push((start, end));
        self.alive.push(true);
        self.dets.insert(start, (end, id));
        id
    }

    fn remove(&mut self, start: usize, first_new: DetId, removed: &mut Vec<DetId>) {
        let (_, id) = self.dets.remove(&start).expect("detection exists");
        self.alive[id as usize] = false;
        if id < first_new {
            removed.push(id);
        }
    }

    /// Activates the next tie group of frames. Returns `None` once all frames are active.
    pub fn next_group(&mut self) -> Option<GroupChange<T>> {
        if self.pos >= self.order.len() {
            return None;
        }
        let score = self.column[self.order[self.pos]];
        let first_new = self.spans.len() as DetId;
        let mut removed = Vec::new();
        while self.pos < self.order.len() && self.column[self.order[self.pos]] == score {
            let f = self.order[self.pos];
            self.pos += 1;
            let mut start = f;
            let mut end = f;
            if let Some((&s, &(e, _))) = self.dets.range(..f).next_back() {
                if e + 1 == f {
                    start = s;
                    self.remove(s, first_new, &mut removed);
                }
            }
            if let Some(&(e, _)) = self.dets.get(&(f + 1)) {
                end = e;
                self.remove(f + 1, first_new, &mut removed);
            }
            self.create(start, end);
        }
        let mut added: Vec<DetId> =
            (first_new..self.spans.len() as DetId).filter(|&id| self.alive[id as usize]).collect();
        added.sort_by_key(|&id| self.spans[id as usize].0);
        Some(GroupChange { score, removed, added })
    }
}
