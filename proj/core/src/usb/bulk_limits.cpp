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

#include "hublab/usb/bulk_limits.hpp"

#include <bit>
#include <string>

#include "hublab/common/error.hpp"

namespace hublab::usb {

PayloadSize::PayloadSize(std::int64_t bytes) : bytes_(bytes) {
  if (bytes < 1 || bytes > 512 || !std::has_single_bit(static_cast<std::uint64_t>(bytes))) {
    throw DomainError("bulk payload must be a power of two in [1, 512], got " +
                      std::to_string(bytes));
  }
}

BulkLimits bulk_limits(PayloadSize payload) {
  BulkLimits out;
  out.transfers_per_microframe =
      kMicroframeBudgetBytes / (payload.bytes() + kBulkTransferOverheadBytes);
  out.bytes_per_microframe = out.transfers_per_microframe * payload.bytes();
  out.bytes_per_second = out.bytes_per_microframe * kMicroframesPerSecond;
  return out;
}

std::int64_t transactions_for(std::int64_t bytes, PayloadSize payload) {
  if (bytes <= 0) return 0;
  return (bytes + payload.bytes() - 1) / payload.bytes();
}

}  // namespace hublab::usb
