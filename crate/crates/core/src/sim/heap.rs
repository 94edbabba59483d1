//! First-fit free-list heap with eager coalescing.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HeapHandle(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub offset: u64,
    pub len: u64,
}

impl Block {
    pub fn end(&self) -> u64 {
        self.offset + self.len
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Placement {
    pub handle: HeapHandle,
    pub offset: u64,
    /// Free blocks inspected, including the one that satisfied the request.
    pub blocks_scanned: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exhausted {
    pub blocks_scanned: usize,
    pub largest_free: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimHeap {
    capacity: u64,
    free: Vec<Block>,
    allocations: BTreeMap<HeapHandle, Block>,
    used: u64,
    next_handle: u64,
}

impl SimHeap {
    pub fn new(capacity: u64) -> Result<SimHeap, SimError> {
        if capacity == 0 {
            return Err(SimError::InvalidRequest("heap capacity must be positive".into()));
        }
        Ok(SimHeap {
            capacity,
            free: vec![Block { offset: 0, len: capacity }],
            allocations: BTreeMap::new(),
            used: 0,
            next_handle: 1,
        })
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn free_blocks(&self) -> &[Block] {
        &self.free
    }

    pub fn total_free(&self) -> u64 {
        self.capacity - self.used
    }

    pub fn largest_free(&self) -> u64 {
        self.free.iter().map(|b| b.len).max().unwrap_or(0)
    }

    pub fn allocation(&self, h: HeapHandle) -> Option<Block> {
        self.allocations.get(&h).copied()
    }

    pub fn allocations(&self) -> impl Iterator<Item = (HeapHandle, Block)> + '_ {
        self.allocations.iter().map(|(h, b)| (*h, *b))
    }

    pub fn live_count(&self) -> usize {
        self.allocations.len()
    }

    /// First fit: the lowest-offset free block with enough room.
    pub fn alloc(&mut self, bytes: u64) -> Result<Placement, Exhausted> {
        assert!(bytes > 0, "zero-byte allocation");
        let Some(idx) = self.free.iter().position(|b| b.len >= bytes) else {
            return Err(Exhausted {
                blocks_scanned: self.free.len(),
                largest_free: self.largest_free(),
            });
        };
        let block = self.free[idx];
        if block.len == bytes {
            self.free.remove(idx);
        } else {
            self.free[idx] = Block {
                offset: block.offset + bytes,
                len: block.len - bytes,
            };
        }
        let handle = HeapHandle(self.next_handle);
        self.next_handle += 1;
        self.allocations.insert(handle, Block { offset: block.offset, len: bytes });
        self.used += bytes;
        Ok(Placement {
            handle,
            offset: block.offset,
            blocks_scanned: idx + 1,
        })
    }

    /// Returns the block to the free list, merging with adjacent free blocks.
    pub fn free(&mut self, handle: HeapHandle) -> Result<Block, SimError> {
        let block = self
            .allocations
            .remove(&handle)
            .ok_or(SimError::InvalidFree(handle.0))?;
        self.used -= block.len;
        let idx = self.free.partition_point(|b| b.offset < block.offset);
        let mut merged = block;
        let mut remove_next = false;
        if let Some(next) = self.free.get(idx) {
            if merged.end() == next.offset {
                merged.len += next.len;
                remove_next = true;
            }
        }
        if remove_next {
            self.free.remove(idx);
        }
        if idx > 0 && self.free[idx - 1].end() == merged.offset {
            self.free[idx - 1].len += merged.len;
        } else {
            self.free.insert(idx, merged);
        }
        Ok(block)
    }

    /// `1 - largest_free / total_free`.
    pub fn fragmentation_index(&self) -> Result<f64, SimError> {
        let total = self.total_free();
        if total == 0 {
            return Err(SimError::Degenerate("no free memory"));
        }
        Ok(1.0 - self.largest_free() as f64 / total as f64)
    }

    /// Slides every live allocation toward offset 0, preserving order, so
    /// that all free memory forms one block. Returns the relocations as
    /// `(handle, old_offset, new_offset)`.
    pub fn compact(&mut self) -> Vec<(HeapHandle, u64, u64)> {
        let mut live: Vec<(HeapHandle, Block)> = self.allocations().collect();
        live.sort_by_key(|(_, b)| b.offset);
        let mut cursor = 0;
        let mut moved = Vec::new();
        for (h, b) in live {
            if b.offset != cursor {
                moved.push((h, b.offset, cursor));
            }
            self.allocations.insert(h, Block { offset: cursor, len: b.len });
            cursor += b.len;
        }
        self.free.clear();
        if cursor < self.capacity {
            self.free.push(Block {
                offset: cursor,
                len: self.capacity - cursor,
            });
        }
        moved
    }

    /// Full-scan consistency check.
    pub fn check_invariants(&self) -> Result<(), String> {
        let free_sum: u64 = self.free.iter().map(|b| b.len).sum();
        if self.used + free_sum != self.capacity {
            return Err(format!(
                "conservation: used {} + free {} != capacity {}",
                self.used, free_sum, self.capacity
            ));
        }
        let alloc_sum: u64 = self.allocations.values().map(|b| b.len).sum();
        if alloc_sum != self.used {
            return Err(format!("used {} != live sum {}", self.used, alloc_sum));
        }
        for w in self.free.windows(2) {
            if w[0].end() > w[1].offset {
                return Err(format!("free blocks overlap or unsorted at {}", w[1].offset));
            }
            if w[0].end() == w[1].offset {
                return Err(format!("adjacent free blocks not coalesced at {}", w[1].offset));
            }
        }
        if self.free.iter().any(|b| b.len == 0 || b.end() > self.capacity) {
            return Err("empty or out-of-range free block".into());
        }
        let mut spans: Vec<Block> = self.free.iter().copied().chain(self.allocations.values().copied()).collect();
        spans.sort_by_key(|b| b.offset);
        let mut cursor = 0;
        for b in spans {
            if b.offset != cursor {
                return Err(format!("gap or overlap at offset {cursor}"));
            }
            cursor = b.end();
        }
        if cursor != self.capacity {
            return Err("spans do not cover the heap".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MB: u64 = 1 << 20;

    #[test]
    fn empty_heap_allocates_at_zero() {
        let mut h = SimHeap::new(10 * MB).unwrap();
        let p = h.alloc(MB).unwrap();
        assert_eq!(p.offset, 0);
        assert_eq!(p.blocks_scanned, 1);
        h.check_invariants().unwrap();
    }

    #[test]
    fn alloc_free_restores_single_block() {
        let mut h = SimHeap::new(10 * MB).unwrap();
        let a = h.alloc(3 * MB).unwrap().handle;
        h.free(a).unwrap();
        assert_eq!(h.free_blocks(), &[Block { offset: 0, len: 10 * MB }]);
        assert_eq!(h.fragmentation_index().unwrap(), 0.0);
    }

    #[test]
    fn freeing_middle_merges_neighbours() {
        let mut h = SimHeap::new(3 * MB).unwrap();
        let a = h.alloc(MB).unwrap().handle;
        let b = h.alloc(MB).unwrap().handle;
        let c = h.alloc(MB).unwrap().handle;
        h.free(a).unwrap();
        h.free(c).unwrap();
        assert_eq!(h.free_blocks().len(), 2);
        assert_eq!(h.fragmentation_index().unwrap(), 0.5);
        h.free(b).unwrap();
        assert_eq!(h.free_blocks(), &[Block { offset: 0, len: 3 * MB }]);
        h.check_invariants().unwrap();
    }

    #[test]
    fn double_free_is_invalid() {
        let mut h = SimHeap::new(MB).unwrap();
        let a = h.alloc(MB).unwrap().handle;
        h.free(a).unwrap();
        assert!(matches!(h.free(a), Err(SimError::InvalidFree(_))));
    }

    #[test]
    fn checkerboard_exhausts_on_large_request() {
        let mut h = SimHeap::new(8 * MB).unwrap();
        let hs: Vec<_> = (0..8).map(|_| h.alloc(MB).unwrap().handle).collect();
        for hd in hs.iter().step_by(2) {
            h.free(*hd).unwrap();
        }
        let err = h.alloc(2 * MB).unwrap_err();
        assert_eq!(err.largest_free, MB);
        assert_eq!(err.blocks_scanned, 4);
        assert_eq!(h.fragmentation_index().unwrap(), 0.75);
    }

    #[test]
    fn full_heap_has_no_fragmentation_index() {
        let mut h = SimHeap::new(MB).unwrap();
        h.alloc(MB).unwrap();
        assert!(h.fragmentation_index().is_err());
    }

    #[test]
    fn compaction_coalesces_everything() {
        let mut h = SimHeap::new(8 * MB).unwrap();
        let hs: Vec<_> = (0..8).map(|_| h.alloc(MB).unwrap().handle).collect();
        for hd in hs.iter().step_by(2) {
            h.free(*hd).unwrap();
        }
        let moved = h.compact();
        assert_eq!(moved.len(), 4);
        assert_eq!(h.free_blocks(), &[Block { offset: 4 * MB, len: 4 * MB }]);
        h.check_invariants().unwrap();
        assert!(h.alloc(4 * MB).is_ok());
    }
}
