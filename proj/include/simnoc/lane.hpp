// Copyright 2026 The simnoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "simnoc/types.hpp"

namespace simnoc {

/// One channel of a link: optional register slice followed by the receiver's
/// ingress FIFO. Modelled as a bounded queue in which a pushed element becomes
/// visible `latency` cycles later. A push is the valid/ready handshake.
template <class T>
class Lane {
 public:
  Lane() = default;
  Lane(std::size_t capacity, std::uint32_t latency) : slots_(capacity), latency_(latency) {
    assert(capacity > 0 && latency > 0);
  }

  std::size_t capacity() const { return slots_.size(); }
  std::uint32_t latency() const { return latency_; }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  bool can_push() const { return size_ < slots_.size(); }

  void push(Cycle now, const T& value) {
    assert(can_push());
    slots_[(head_ + size_) % slots_.size()] = Slot{now + latency_, value};
    ++size_;
    ++transfers_;
  }

  bool ready(Cycle now) const { return size_ > 0 && slots_[head_].visible_at <= now; }
  const T& front() const { return slots_[head_].value; }
  void pop() {
    assert(size_ > 0);
    head_ = (head_ + 1) % slots_.size();
    --size_;
  }

  /// Elements currently held, oldest first.
  template <class F>
  void for_each(F&& f) const {
    for (std::size_t i = 0; i < size_; ++i) f(slots_[(head_ + i) % slots_.size()].value);
  }

  /// Handshakes completed since construction.
  std::uint64_t transfers() const { return transfers_; }

 private:
  struct Slot {
    Cycle visible_at = 0;
    T value{};
  };
  std::vector<Slot> slots_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
  std::uint32_t latency_ = 1;
  std::uint64_t transfers_ = 0;
};

}  // namespace simnoc
