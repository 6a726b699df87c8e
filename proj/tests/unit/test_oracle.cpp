// Copyright (c) 2026, hsiaccel authors.
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//         http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

// Sanity checks on the reference implementations themselves, against
// values worked out by hand.

#include <gtest/gtest.h>

#include "oracle.hpp"

TEST(OracleSim, HandSchedules) {
  EXPECT_EQ(oracle::simulate(2, {4, 4, 4}, {10, 10, 10}, 1).total, 37);
  const auto s = oracle::simulate(0, {0, 100, 0}, {10, 10, 10}, 0);
  EXPECT_EQ(s.stall, 90);
  EXPECT_EQ(s.compute_start[1], 100);
  EXPECT_EQ(oracle::simulate(5, {}, {}, 3).total, 8);
  // A single slot serialises load and compute.
  EXPECT_EQ(oracle::simulate(0, {5, 5}, {10, 10}, 0, 1).total, 30);
}

TEST(OracleFixed, HandConvolution) {
  oracle::FixedLayer l;
  l.kh = l.kw = 3;
  l.c_in = l.c_out = 1;
  l.weights = {0, 0, 0, 0, 2, 0, 0, 0, 0};
  l.bias = {3};
  l.in_e = -2;
  l.w_e = -1;
  l.b_e = -3;   // already on the accumulator grid (-2 + -1)
  l.out_e = -1;  // (2x + 3) * 2^-3 expressed at 2^-1: divide by 4
  std::vector<int> in(16);
  for (int i = 0; i < 16; ++i) in[static_cast<std::size_t>(i)] = i;
  const auto out = oracle::conv(in, 4, 4, l);
  ASSERT_EQ(out.size(), 4u);
  // centre of window (0,0) is in[5] = 5: (10 + 3) / 4 = 3.25 -> 3
  EXPECT_EQ(out[0], 3);
  // in[6] = 6: 15 / 4 = 3.75 -> 4
  EXPECT_EQ(out[1], 4);
  // window (1,0) centres on in[9]: 21 / 4 -> 5; (1,1) on in[10]: 23 / 4 -> 6
  EXPECT_EQ(out[2], 5);
  EXPECT_EQ(out[3], 6);
}

TEST(OracleFixed, HalfRoundsAwayAndSaturates) {
  oracle::FixedLayer l;
  l.c_in = 1;
  l.c_out = 2;
  l.weights = {1, -1};
  l.bias = {0, 0};
  l.in_e = 0;
  l.w_e = 0;
  l.b_e = 0;
  l.out_e = 1;
  EXPECT_EQ(oracle::fc({5}, l), (std::vector<int>{3, -3}));
  l.out_e = -20;
  EXPECT_EQ(oracle::fc({5}, l), (std::vector<int>{32767, -32768}));
  l.relu = true;
  EXPECT_EQ(oracle::fc({5}, l), (std::vector<int>{32767, 0}));
}
