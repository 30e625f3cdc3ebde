#pragma once

// Randomized drivers shared by the unit tests and the acceptance binary.

#include <cstdint>
#include <string>
#include <vector>

#include "trident/stream_net.hpp"

namespace harness {

struct FuzzReport {
    std::uint64_t sequences = 0;
    std::uint64_t commands = 0;
    std::uint64_t accepted = 0;
    std::uint64_t conservation_failures = 0;
    std::uint64_t lifecycle_failures = 0;
    std::uint64_t authorization_failures = 0;
    std::uint64_t integrity_failures = 0;
    std::uint64_t replay_failures = 0;
    std::string first_failure;

    bool ok() const {
        return conservation_failures == 0 && lifecycle_failures == 0 && authorization_failures == 0 &&
               integrity_failures == 0 && replay_failures == 0;
    }
};

// Random command sequences against a fresh market each, checking every
// invariant after every command. Every `text_log_every`-th sequence also
// round-trips its log through the text format.
FuzzReport fuzz_market(std::uint64_t seed, std::uint64_t sequences, std::size_t length,
                       std::uint64_t text_log_every = 100);

struct ForkReport {
    std::uint64_t scenarios = 0;
    std::uint64_t challenges = 0;
    std::uint64_t expected_proofs = 0;  // challenges at or after a fork
    std::uint64_t proofs_found = 0;     // valid, matching proofs at or after a fork
    std::uint64_t spurious_proofs = 0;  // proofs before a fork or on honest runs
    std::uint64_t payouts_checked = 0;
    std::uint64_t payout_failures = 0;  // wrong total or wrong split
    std::uint64_t early_reclaims = 0;   // reclaim attempts before takedown + T1
    std::uint64_t early_reclaim_accepted = 0;
    std::uint64_t reclaim_failures = 0; // on-time reclaim rejected or wrong amount
    std::string first_failure;
};

// `forked` scenarios fork the producer at a random index; the rest are
// honest and end with takedown and reclaim attempts.
ForkReport fork_scenarios(std::uint64_t seed, std::uint64_t scenarios, bool forked);

struct HandshakeCase {
    trident::BuyerFault fault;
    bool expect_accept = false;
    bool accepted = false;
    std::string reason;
};

// The four buyer behaviours against one live seller over loopback.
std::vector<HandshakeCase> handshake_matrix(std::uint64_t seed);

} // namespace harness
