// Copyright 2026 The drsp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Ownership tracking and the LOCC transcript of a protocol run.

#pragma once

#include <algorithm>
#include <charconv>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "drsp/config.hpp"

namespace drsp {

enum class Party { kAlice, kBob };

inline std::string_view party_name(Party p) { return p == Party::kAlice ? "Alice" : "Bob"; }
inline Party other(Party p) { return p == Party::kAlice ? Party::kBob : Party::kAlice; }

enum class EventKind { kGate, kTransmission, kClassicalMessage, kMeasurement };

inline std::string_view event_name(EventKind k) {
  switch (k) {
    case EventKind::kGate: return "gate";
    case EventKind::kTransmission: return "transmission";
    case EventKind::kClassicalMessage: return "classical";
    case EventKind::kMeasurement: return "measurement";
  }
  return "unknown";
}

struct LedgerEvent {
  int step = 0;
  Party party = Party::kAlice;  // acting party; the sender for messages and transmissions
  EventKind kind = EventKind::kGate;
  std::string subsystems;       // labels, e.g. "AC"
  std::string payload;          // gate name, outcome, or transmitted label
  // Receiver of a message or transmission. Not serialized: with two
  // parties it is always the other one.
  std::optional<Party> recipient;
};

struct LocalityReport {
  bool ok = true;
  std::vector<std::string> violations;
  explicit operator bool() const { return ok; }
};

class OwnershipLedger {
 public:
  OwnershipLedger() = default;
  explicit OwnershipLedger(std::map<char, Party> initial) : initial_(initial), owner_(std::move(initial)) {}

  /// Alice holds A and the ancilla C, Bob holds B.
  static OwnershipLedger two_party() {
    return OwnershipLedger({{'A', Party::kAlice}, {'B', Party::kBob}, {'C', Party::kAlice}});
  }

  const std::map<char, Party>& initial_owners() const { return initial_; }
  const std::vector<LedgerEvent>& events() const { return events_; }
  Party owner(char label) const { return owner_.at(label); }

  /// Appends without any checks; used for replay and for building
  /// deliberately broken transcripts.
  void append(LedgerEvent e) {
    if (e.kind == EventKind::kTransmission && e.recipient) {
      for (char c : e.subsystems) owner_[c] = *e.recipient;
    }
    events_.push_back(std::move(e));
  }

  void record_gate(int step, Party by, std::string subsystems, std::string_view gate) {
    require_owned(by, subsystems, "gate");
    append({step, by, EventKind::kGate, std::move(subsystems), std::string(gate), std::nullopt});
  }

  void record_measurement(int step, Party by, char subsystem, int outcome) {
    require_owned(by, std::string(1, subsystem), "measurement");
    append({step, by, EventKind::kMeasurement, std::string(1, subsystem), std::to_string(outcome), std::nullopt});
  }

  void record_message(int step, Party from, char about, int outcome) {
    append({step, from, EventKind::kClassicalMessage, std::string(1, about), std::to_string(outcome), other(from)});
  }

  void record_transmission(int step, Party from, char subsystem) {
    require_owned(from, std::string(1, subsystem), "transmission");
    append({step, from, EventKind::kTransmission, std::string(1, subsystem), std::string(1, subsystem), other(from)});
  }

  /// step \t party \t kind \t subsystems \t payload, one event per line;
  /// subsystem labels are comma-separated.
  std::string to_tsv() const {
    std::string out;
    for (const auto& e : events_) {
      out += std::to_string(e.step);
      out += '\t';
      out += party_name(e.party);
      out += '\t';
      out += event_name(e.kind);
      out += '\t';
      for (std::size_t i = 0; i < e.subsystems.size(); ++i) {
        if (i) out += ',';
        out += e.subsystems[i];
      }
      out += '\t';
      out += e.payload;
      out += '\n';
    }
    return out;
  }

  static OwnershipLedger from_tsv(std::string_view text, std::map<char, Party> initial) {
    OwnershipLedger ledger(std::move(initial));
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> fields;
      std::size_t start = 0;
      for (;;) {
        const auto tab = line.find('\t', start);
        fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
        if (tab == std::string::npos) break;
        start = tab + 1;
      }
      if (fields.size() != 5) throw std::invalid_argument("transcript line needs 5 tab-separated fields");
      LedgerEvent e;
      const auto res = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), e.step);
      if (res.ec != std::errc{}) throw std::invalid_argument("bad step number in transcript");
      if (fields[1] == "Alice") {
        e.party = Party::kAlice;
      } else if (fields[1] == "Bob") {
        e.party = Party::kBob;
      } else {
        throw std::invalid_argument("unknown party in transcript: " + fields[1]);
      }
      bool known = false;
      for (EventKind k : {EventKind::kGate, EventKind::kTransmission, EventKind::kClassicalMessage,
                          EventKind::kMeasurement}) {
        if (fields[2] == event_name(k)) {
          e.kind = k;
          known = true;
        }
      }
      if (!known) throw std::invalid_argument("unknown event kind in transcript: " + fields[2]);
      for (char c : fields[3]) {
        if (c != ',') e.subsystems += c;
      }
      e.payload = fields[4];
      if (e.kind == EventKind::kTransmission || e.kind == EventKind::kClassicalMessage) e.recipient = other(e.party);
      ledger.append(std::move(e));
    }
    return ledger;
  }

 private:
  void require_owned(Party by, const std::string& subsystems, const char* what) const {
    for (char c : subsystems) {
      if (owner_.at(c) != by) {
        throw InvariantViolation(std::string(what) + " on " + c + " by a party that does not hold it");
      }
    }
  }

  std::map<char, Party> initial_;
  std::map<char, Party> owner_;
  std::vector<LedgerEvent> events_;
};

/// Replays the ledger from its initial ownership and reports every event
/// that touches a subsystem the acting party does not hold at that moment,
/// or a message that does not cross between the two parties.
inline LocalityReport assert_locality(const OwnershipLedger& ledger) {
  LocalityReport report;
  std::map<char, Party> owner = ledger.initial_owners();
  auto fail = [&](std::size_t i, const std::string& why) {
    report.ok = false;
    report.violations.push_back("event " + std::to_string(i) + ": " + why);
  };
  const auto& events = ledger.events();
  for (std::size_t i = 0; i < events.size(); ++i) {
    const LedgerEvent& e = events[i];
    for (char c : e.subsystems) {
      if (owner.find(c) == owner.end()) fail(i, std::string("unknown subsystem ") + c);
    }
    switch (e.kind) {
      case EventKind::kGate:
      case EventKind::kMeasurement:
      case EventKind::kTransmission:
        for (char c : e.subsystems) {
          const auto it = owner.find(c);
          if (it != owner.end() && it->second != e.party) {
            fail(i, std::string(party_name(e.party)) + " acts on " + c + " held by " +
                        std::string(party_name(it->second)));
          }
        }
        break;
      case EventKind::kClassicalMessage:
        if (!e.recipient || *e.recipient == e.party) fail(i, "classical message does not cross between parties");
        break;
    }
    if (e.kind == EventKind::kTransmission) {
      if (!e.recipient || *e.recipient == e.party) {
        fail(i, "transmission without a distinct recipient");
      } else {
        for (char c : e.subsystems) owner[c] = *e.recipient;
      }
    }
  }
  return report;
}

}  // namespace drsp
