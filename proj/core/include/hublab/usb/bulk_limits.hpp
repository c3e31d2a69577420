/*
 * Copyright 2026 The hublab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>

namespace hublab::usb {

inline constexpr std::int64_t kFrameUs = 1000;
inline constexpr std::int64_t kMicroframeUs = 125;
inline constexpr std::int64_t kMicroframesPerSecond = 8000;
inline constexpr std::int64_t kMicroframesPerFrame = kFrameUs / kMicroframeUs;

/// Raw high-speed bus bytes per microframe: 480 Mb/s * 125 us / 8.
inline constexpr std::int64_t kMicroframeBudgetBytes = 7500;

/// Fitted per-transfer protocol overhead in bytes (token, handshake,
/// inter-packet gaps, CRC, bit stuffing lumped together). With the 7500-byte
/// budget this is the only integer overhead that reproduces the five
/// published high-speed bulk rows (payloads 1, 8, 32, 128, 512) exactly.
inline constexpr std::int64_t kBulkTransferOverheadBytes = 55;

/// Bulk data payload size: a power of two in [1, 512].
class PayloadSize {
 public:
  /// Throws DomainError for anything that is not a power of two in range.
  explicit PayloadSize(std::int64_t bytes);

  std::int64_t bytes() const noexcept { return bytes_; }

  friend bool operator==(PayloadSize, PayloadSize) = default;

 private:
  std::int64_t bytes_;
};

struct BulkLimits {
  std::int64_t transfers_per_microframe = 0;
  std::int64_t bytes_per_microframe = 0;
  std::int64_t bytes_per_second = 0;

  friend bool operator==(const BulkLimits&, const BulkLimits&) = default;
};

/// Maximum bulk transfers per microframe and the resulting throughput:
///   transfers = floor(budget / (payload + overhead))
///   bytes/uframe = transfers * payload
///   bytes/s = bytes/uframe * 8000
BulkLimits bulk_limits(PayloadSize payload);

/// Number of bulk transactions needed to move `bytes` at `payload`.
std::int64_t transactions_for(std::int64_t bytes, PayloadSize payload);

}  // namespace hublab::usb
