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

#include <gtest/gtest.h>

#include "hublab/common/error.hpp"
#include "hublab/usb/bulk_limits.hpp"
#include "hublab/usb/hub_config.hpp"

using hublab::DomainError;
using hublab::usb::bulk_limits;
using hublab::usb::BulkLimits;
using hublab::usb::PayloadSize;

namespace {

struct Row {
  std::int64_t payload, transfers, per_uframe, per_second;
};

// Published high-speed rows.
constexpr Row kRows[] = {
    {1, 133, 133, 1'064'000},
    {8, 119, 952, 7'616'000},
    {32, 86, 2752, 22'016'000},
    {128, 40, 5120, 40'960'000},
    {512, 13, 6656, 53'248'000},
};

}  // namespace

TEST(BulkLimits, PublishedRowsExact) {
  for (const auto& r : kRows) {
    const BulkLimits l = bulk_limits(PayloadSize(r.payload));
    EXPECT_EQ(l.transfers_per_microframe, r.transfers) << r.payload;
    EXPECT_EQ(l.bytes_per_microframe, r.per_uframe) << r.payload;
    EXPECT_EQ(l.bytes_per_second, r.per_second) << r.payload;
  }
}

TEST(BulkLimits, OverheadIsOnlyIntegerFit) {
  // Independent search: which integer overheads reproduce every row with the
  // 7500-byte budget.
  int fits = 0;
  std::int64_t found = -1;
  for (std::int64_t o = 0; o < 2000; ++o) {
    bool ok = true;
    for (const auto& r : kRows) ok = ok && (7500 / (r.payload + o) == r.transfers);
    if (ok) {
      ++fits;
      found = o;
    }
  }
  EXPECT_EQ(fits, 1);
  EXPECT_EQ(found, hublab::usb::kBulkTransferOverheadBytes);
}

TEST(BulkLimits, MonotoneOverAllPowersOfTwo) {
  BulkLimits prev = bulk_limits(PayloadSize(1));
  for (std::int64_t p = 2; p <= 512; p *= 2) {
    const BulkLimits l = bulk_limits(PayloadSize(p));
    EXPECT_LE(l.transfers_per_microframe, prev.transfers_per_microframe);
    EXPECT_GE(l.bytes_per_second, prev.bytes_per_second);
    EXPECT_EQ(l.bytes_per_microframe, l.transfers_per_microframe * p);
    EXPECT_EQ(l.bytes_per_second, l.bytes_per_microframe * 8000);
    prev = l;
  }
  EXPECT_EQ(bulk_limits(PayloadSize(64)).transfers_per_microframe, 63);
  EXPECT_EQ(bulk_limits(PayloadSize(256)).transfers_per_microframe, 24);
}

TEST(BulkLimits, Pure) { EXPECT_EQ(bulk_limits(PayloadSize(32)), bulk_limits(PayloadSize(32))); }

TEST(BulkLimits, RejectsInvalidPayload) {
  for (std::int64_t bad : {0, -8, 3, 12, 1024, 513}) {
    EXPECT_THROW(PayloadSize{bad}, DomainError) << bad;
  }
}

TEST(BulkLimits, TransactionsFor) {
  const PayloadSize p(512);
  EXPECT_EQ(hublab::usb::transactions_for(4096, p), 8);
  EXPECT_EQ(hublab::usb::transactions_for(4097, p), 9);
  EXPECT_EQ(hublab::usb::transactions_for(16, p), 1);
  EXPECT_EQ(hublab::usb::transactions_for(0, p), 0);
}

TEST(HubConfig, ValidateAndDigest) {
  hublab::usb::HubConfig hub;
  EXPECT_NO_THROW(hub.validate());
  const auto d = hub.digest();
  hub.arbitration.kind = hublab::usb::ArbitrationKind::randomized_allocation;
  EXPECT_NE(d, hub.digest());
  hub.tt_count = 0;
  EXPECT_THROW(hub.validate(), hublab::ConfigError);
}

TEST(HubConfig, ParseNames) {
  using hublab::usb::ArbitrationKind;
  EXPECT_EQ(hublab::usb::parse_arbitration_kind("fair"), ArbitrationKind::fair_round_robin);
  EXPECT_EQ(hublab::usb::parse_arbitration_kind("randomized_allocation"),
            ArbitrationKind::randomized_allocation);
  EXPECT_THROW(hublab::usb::parse_arbitration_kind("lottery"), hublab::ConfigError);
}
