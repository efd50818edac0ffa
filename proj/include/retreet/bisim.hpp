#pragma once

#include "retreet/logic.hpp"
#include "retreet/mso.hpp"

#include <optional>
#include <string>
#include <vector>

namespace retreet {

// Straight-line body with locals renamed by first occurrence and single
// return slots collapsed, so "return a + 1" and "return[1] = b + 1" agree.
std::string canonical_body(const BlockTable& t, int q);

// Candidate non-call maps P -> P', order-preserving first. Throws
// Error("NonCallMismatch") when the bodies differ as multisets.
std::vector<std::map<int, int>> noncall_matchings(const BlockTable& p, const BlockTable& p2, size_t cap = 10000);

// Smallest relation closed under the anchor and caller clauses, restricted to
// call pairs with the same direction.
BisimRelation close_relation(const BlockTable& p, const BlockTable& p2, const std::map<int, int>& noncalls);
bool is_closed(const BlockTable& p, const BlockTable& p2, const BisimRelation& r);

struct BisimCheck {
    bool accepted = false;
    std::vector<std::string> reasons;
};

// Closure, caller coverage, and equivalent path conditions for related pairs.
BisimCheck check_bisimulation(const BlockTable& p, const BlockTable& p2, const BisimRelation& r,
                              const LiaOptions& opt = {});

std::vector<BisimRelation> enumerate_bisimulations(const BlockTable& p, const BlockTable& p2, size_t cap = 10000);

struct BisimSearch {
    std::optional<BisimRelation> accepted;
    size_t tried = 0;
    bool exhausted = true;  // false when the cap cut enumeration short
    std::vector<std::pair<BisimRelation, std::vector<std::string>>> rejected;
};

BisimSearch find_bisimulation(const BlockTable& p, const BlockTable& p2, size_t cap = 10000,
                              const LiaOptions& opt = {});

std::string print_relation(const BisimRelation& r);

}  // namespace retreet
