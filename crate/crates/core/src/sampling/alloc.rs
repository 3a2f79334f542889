//! Per-thread allocation accounting for peak-memory measurements.
//!
//! With the `alloc-stats` feature the crate installs [`CountingAllocator`] as
//! the global allocator. Each thread tracks its own live-byte counter, so a
//! measurement on one thread is not disturbed by allocations elsewhere.

use std::alloc::{GlobalAlloc, Layout, System};
use std::cell::Cell;
use std::sync::atomic::{AtomicBool, Ordering};

pub struct CountingAllocator;

static ACTIVE: AtomicBool = AtomicBool::new(false);

thread_local! {
    static LIVE: Cell<isize> = const { Cell::new(0) };
    static PEAK: Cell<isize> = const { Cell::new(0) };
}

#[inline]
fn record(delta: isize) {
    let _ = LIVE.try_with(|live| {
        let now = live.get() + delta;
        live.set(now);
        let _ = PEAK.try_with(|peak| {
            if now > peak.get() {
                peak.set(now);
            }
        });
    });
}

unsafe impl GlobalAlloc for CountingAllocator {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let p = System.alloc(layout);
        if !p.is_null() {
            record(layout.size() as isize);
        }
        p
    }

    unsafe fn alloc_zeroed(&self, layout: Layout) -> *mut u8 {
        let p = System.alloc_zeroed(layout);
        if !p.is_null() {
            record(layout.size() as isize);
        }
        p
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        System.dealloc(ptr, layout);
        record(-(layout.size() as isize));
    }

    unsafe fn realloc(&self, ptr: *mut u8, layout: Layout, new_size: usize) -> *mut u8 {
        let p = System.realloc(ptr, layout, new_size);
        if !p.is_null() {
            record(new_size as isize - layout.size() as isize);
        }
        p
    }
}

impl CountingAllocator {
    pub const fn new() -> Self {
        CountingAllocator
    }
}

impl Default for CountingAllocator {
    fn default() -> Self {
        Self::new()
    }
}

/// Whether allocation accounting is live in this process.
pub fn is_active() -> bool {
    if !ACTIVE.load(Ordering::Relaxed) {
        // Probe: a live counter moves when we allocate.
        let before = LIVE.with(Cell::get);
        let probe = std::hint::black_box(vec![0u8; 64]);
        let moved = LIVE.with(Cell::get) != before;
        drop(probe);
        if moved {
            ACTIVE.store(true, Ordering::Relaxed);
        }
    }
    ACTIVE.load(Ordering::Relaxed)
}

/// Runs `f` and returns its result with the peak number of bytes that were
/// live on this thread during the call, above the level at entry.
pub fn measure<R>(f: impl FnOnce() -> R) -> (R, usize) {
    let base = LIVE.with(Cell::get);
    let saved = PEAK.with(|p| p.replace(base));
    let out = f();
    let peak = PEAK.with(Cell::get);
    PEAK.with(|p| p.set(saved.max(peak)));
    (out, (peak - base).max(0) as usize)
}
