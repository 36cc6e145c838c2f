#pragma once

// Lockstep simulation of an LLM oracle network: requests written to a mock
// chain, nodes fetching answers, a commit-reveal exchange, per-node
// aggregation, a result-digest quorum, and callback delivery.

#include <cstdint>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "sentetruth/adversary.hpp"
#include "sentetruth/aggregation.hpp"
#include "sentetruth/dataset.hpp"
#include "sentetruth/embedding.hpp"
#include "sentetruth/epoch_series.hpp"
#include "sentetruth/error.hpp"
#include "sentetruth/rng.hpp"
#include "sentetruth/sha256.hpp"

namespace sentetruth {

/// SHA-256 of the UTF-8 bytes of `content`.
inline Digest commit_digest(std::string_view content) { return sha256(content); }

struct TaskRequest {
  std::string task_id;
  std::string question_id;
  std::string question;
  std::string model;
  std::string requester;
};

struct ConsensusOutcome {
  std::string task_id;
  std::string final_content;
  std::optional<Digest> final_digest;
  std::set<NodeId> supporting_nodes;
  int quorum = 0;
  bool success = false;
  /// Node that wrote the fulfilment, when one did.
  std::optional<NodeId> submitter;
};

enum class EventKind { request_written, data_fulfilled, callback_delivered };

inline std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::request_written: return "request_written";
    case EventKind::data_fulfilled: return "data_fulfilled";
    case EventKind::callback_delivered: return "callback_delivered";
  }
  return "";
}

struct ChainEvent {
  std::int64_t event_id = 0;
  EventKind kind = EventKind::request_written;
  std::variant<TaskRequest, ConsensusOutcome> payload;
  int block_round = 0;
};

inline nlohmann::json to_json(const ChainEvent& e) {
  nlohmann::json payload;
  if (const auto* req = std::get_if<TaskRequest>(&e.payload)) {
    payload = {{"task_id", req->task_id},
               {"question_id", req->question_id},
               {"question", req->question},
               {"model", req->model},
               {"requester", req->requester}};
  } else {
    const auto& out = std::get<ConsensusOutcome>(e.payload);
    payload = {{"task_id", out.task_id},
               {"final_content", out.final_content},
               {"final_digest", out.final_digest ? nlohmann::json(to_hex(*out.final_digest)) : nlohmann::json()},
               {"supporting_nodes", std::vector<NodeId>(out.supporting_nodes.begin(), out.supporting_nodes.end())},
               {"quorum", out.quorum},
               {"success", out.success},
               {"submitter", out.submitter ? nlohmann::json(*out.submitter) : nlohmann::json()}};
  }
  return {{"event_id", e.event_id}, {"kind", to_string(e.kind)}, {"block_round", e.block_round}, {"payload", payload}};
}

/// Append-only event log standing in for the oracle contract.
class MockChain {
 public:
  explicit MockChain(std::set<std::string> known_models, std::string requester = "0x00000000000000000000000000000000000c11a0")
      : known_models_(std::move(known_models)), requester_(std::move(requester)) {}

  const std::vector<ChainEvent>& events() const { return events_; }
  int round() const { return round_; }
  void advance_round() { ++round_; }

  bool knows_model(std::string_view model) const { return known_models_.contains(std::string(model)); }
  const std::string& requester() const { return requester_; }

  std::string next_task_id() {
    std::ostringstream id;
    id << std::setw(6) << std::setfill('0') << ++task_seq_;
    return id.str();
  }

  const ChainEvent& append(EventKind kind, std::variant<TaskRequest, ConsensusOutcome> payload) {
    events_.push_back(ChainEvent{static_cast<std::int64_t>(events_.size()) + 1, kind, std::move(payload), round_});
    return events_.back();
  }

  void export_log(std::ostream& out) const {
    for (const auto& e : events_) out << to_json(e).dump() << '\n';
  }

 private:
  std::set<std::string> known_models_;
  std::string requester_;
  std::vector<ChainEvent> events_;
  int task_seq_ = 0;
  int round_ = 0;
};

/// Writes a request_written event and returns the request.
inline TaskRequest submit_request(MockChain& chain, std::string_view question, std::string_view model,
                                  std::string_view question_id = {}) {
  if (question.empty()) fail(ErrorCode::InvalidArgument, "request question is empty");
  if (!chain.knows_model(model)) fail(ErrorCode::UnknownModel, std::string(model));
  TaskRequest req{chain.next_task_id(), std::string(question_id), std::string(question), std::string(model),
                  chain.requester()};
  chain.append(EventKind::request_written, req);
  return req;
}

enum class NodePhase { idle, committed, revealed, aggregated, signed_off };

inline std::string_view to_string(NodePhase p) {
  switch (p) {
    case NodePhase::idle: return "idle";
    case NodePhase::committed: return "committed";
    case NodePhase::revealed: return "revealed";
    case NodePhase::aggregated: return "aggregated";
    case NodePhase::signed_off: return "signed";
  }
  return "";
}

struct NodeState {
  NodeId node_id = 0;
  NodePhase phase = NodePhase::idle;
  std::optional<Digest> commit;
  std::optional<std::string> reveal;
  std::map<NodeId, Digest> received_commits;
  std::map<NodeId, std::string> received_reveals;

  /// The node's fetched (possibly attacked) answer for the current task.
  std::optional<ResponseRecord> fetched;
  /// Peers whose reveal verified against their commit, and peers caught
  /// revealing something else.
  std::set<NodeId> verified;
  std::set<NodeId> excluded;
  std::optional<AggregationResult> result;
  std::optional<Digest> result_digest;
  std::map<NodeId, Digest> received_results;
  CredibilityTable credibility;
};

struct SimulationConfig {
  /// Matching result digests needed for consensus. 0 selects floor(n/2)+1.
  int quorum = 0;
  Strategy strategy = Strategy::similarity_td;
  std::shared_ptr<const EmbeddingProvider> provider = std::make_shared<TfidfProvider>();
  std::optional<AttackPlan> attack;
  /// Per-message drop probability for peer-to-peer broadcasts.
  double drop_probability = 0.0;
  std::uint64_t seed = 0;
  std::set<NodeId> offline_nodes;
  /// Nodes that commit to their own answer but reveal a copy of a peer's.
  std::set<NodeId> freeloaders;
};

enum class TaskStage { listen, commit, reveal, aggregate, finalize, done };

inline std::string_view to_string(TaskStage s) {
  switch (s) {
    case TaskStage::listen: return "listen";
    case TaskStage::commit: return "commit";
    case TaskStage::reveal: return "reveal";
    case TaskStage::aggregate: return "aggregate";
    case TaskStage::finalize: return "finalize";
    case TaskStage::done: return "done";
  }
  return "";
}

struct RoundReport {
  int block_round = 0;
  TaskStage stage = TaskStage::listen;
  /// Nodes that completed this stage.
  std::set<NodeId> advanced;
  bool stalled = false;
  std::string message;
};

struct TaskRun {
  TaskRequest request;
  ConsensusOutcome outcome;
  std::vector<RoundReport> rounds;
  bool stalled = false;
};

class Simulation {
 public:
  Simulation(const Corpus& corpus, SimulationConfig config, std::optional<CredibilityTable> initial = std::nullopt)
      : corpus_(&corpus),
        config_(std::move(config)),
        chain_(std::set<std::string>(corpus.models().begin(), corpus.models().end())) {
    const int n = corpus.node_count();
    if (config_.quorum == 0) config_.quorum = n / 2 + 1;
    if (config_.quorum < 1) fail(ErrorCode::InvalidArgument, "quorum must be >= 1");
    if (!(config_.drop_probability >= 0.0 && config_.drop_probability <= 1.0))
      fail(ErrorCode::InvalidArgument, "drop_probability must be in [0, 1]");
    if (!config_.provider) fail(ErrorCode::InvalidArgument, "simulation needs an embedding provider");
    const CredibilityTable start = initial ? *initial : init_credibility(n);
    nodes_.resize(static_cast<std::size_t>(n));
    for (NodeId i = 0; i < n; ++i) {
      nodes_[static_cast<std::size_t>(i)].node_id = i;
      nodes_[static_cast<std::size_t>(i)].credibility = start;
    }
  }

  const MockChain& chain() const { return chain_; }
  const std::vector<NodeState>& nodes() const { return nodes_; }
  const SimulationConfig& config() const { return config_; }
  TaskStage stage() const { return stage_; }
  bool idle() const { return stage_ == TaskStage::done; }
  const std::optional<TaskRequest>& current_task() const { return task_; }
  const std::optional<ConsensusOutcome>& outcome() const { return outcome_; }

  /// Writes a request for a corpus question and arms the nodes for it.
  const TaskRequest& submit(std::string_view question_id, std::string_view model) {
    if (stage_ != TaskStage::done) fail(ErrorCode::InvalidArgument, "previous task still in flight");
    const Question& q = corpus_->question(question_id);
    task_ = submit_request(chain_, q.text, model, q.question_id);
    stage_ = TaskStage::listen;
    outcome_.reset();
    for (auto& node : nodes_) {
      CredibilityTable kept = std::move(node.credibility);
      node = NodeState{};
      node.node_id = static_cast<NodeId>(&node - nodes_.data());
      node.credibility = std::move(kept);
    }
    drop_rng_ = Rng::from_label("drop|" + std::to_string(config_.seed) + "|" + task_->task_id);
    return *task_;
  }

  /// Advances every node one protocol stage.
  RoundReport step_round() {
    if (stage_ == TaskStage::done) fail(ErrorCode::InvalidArgument, "no task in flight");
    chain_.advance_round();
    RoundReport report;
    report.block_round = chain_.round();
    report.stage = stage_;
    switch (stage_) {
      case TaskStage::listen: listen(report); break;
      case TaskStage::commit: commit(report); break;
      case TaskStage::reveal: reveal(report); break;
      case TaskStage::aggregate: aggregate_round(report); break;
      case TaskStage::finalize: finalize(report); break;
      case TaskStage::done: break;
    }
    if (report.stalled) halt(report);
    return report;
  }

  /// Submits one request and steps until it finalizes or stalls.
  TaskRun run_task(std::string_view question_id, std::string_view model) {
    TaskRun run;
    run.request = submit(question_id, model);
    while (stage_ != TaskStage::done) {
      run.rounds.push_back(step_round());
      if (run.rounds.back().stalled) run.stalled = true;
    }
    run.outcome = *outcome_;
    return run;
  }

 private:
  bool deliver(NodeId from, NodeId to) {
    if (from == to || config_.drop_probability <= 0.0) return true;
    return drop_rng_.unit() >= config_.drop_probability;
  }

  NodeState& node(NodeId id) { return nodes_[static_cast<std::size_t>(id)]; }

  void halt(RoundReport& report) {
    ConsensusOutcome out;
    out.task_id = task_->task_id;
    out.quorum = config_.quorum;
    out.success = false;
    outcome_ = out;
    stage_ = TaskStage::done;
    report.message = "StalledRound: " + report.message;
  }

  void listen(RoundReport& report) {
    // Nodes observe the request event and query the model (the corpus).
    std::vector<ResponseRecord> panel = corpus_->panel(task_->question_id, task_->model, Variant::original);
    if (config_.attack) panel = apply_attack(*config_.attack, panel, *corpus_);
    for (auto& r : panel) {
      const NodeId id = r.node_id;
      if (config_.offline_nodes.contains(id)) continue;
      node(id).fetched = std::move(r);
      report.advanced.insert(id);
    }
    stage_ = TaskStage::commit;
  }

  void commit(RoundReport& report) {
    for (auto& sender : nodes_) {
      if (!sender.fetched) continue;
      sender.commit = commit_digest(sender.fetched->content);
      sender.phase = NodePhase::committed;
      report.advanced.insert(sender.node_id);
      for (auto& receiver : nodes_)
        if (receiver.fetched && deliver(sender.node_id, receiver.node_id))
          receiver.received_commits.emplace(sender.node_id, *sender.commit);
    }
    stage_ = TaskStage::reveal;
  }

  std::string reveal_content(const NodeState& n) const {
    const std::string& own = n.fetched->content;
    if (!config_.freeloaders.contains(n.node_id)) return own;
    for (const auto& peer : nodes_) {
      if (peer.node_id != n.node_id && peer.fetched && peer.fetched->content != own) return peer.fetched->content;
    }
    return own + " ";
  }

  void reveal(RoundReport& report) {
    // Only nodes holding >= t commits reveal; commits arriving later are ignored.
    std::vector<NodeId> revealing;
    for (auto& n : nodes_) {
      if (n.phase != NodePhase::committed) continue;
      if (static_cast<int>(n.received_commits.size()) < config_.quorum) continue;
      n.reveal = reveal_content(n);
      n.phase = NodePhase::revealed;
      revealing.push_back(n.node_id);
      report.advanced.insert(n.node_id);
    }
    for (const NodeId s : revealing) {
      for (auto& receiver : nodes_)
        if (receiver.phase == NodePhase::revealed && deliver(s, receiver.node_id))
          receiver.received_reveals.emplace(s, *node(s).reveal);
    }
    for (auto& n : nodes_) {
      if (n.phase != NodePhase::revealed) continue;
      for (const auto& [peer, content] : n.received_reveals) {
        const auto c = n.received_commits.find(peer);
        if (c != n.received_commits.end() && commit_digest(content) == c->second)
          n.verified.insert(peer);
        else
          n.excluded.insert(peer);
      }
    }
    if (static_cast<int>(revealing.size()) < config_.quorum) {
      report.stalled = true;
      report.message = std::to_string(revealing.size()) + " node(s) reached the reveal round, quorum is " +
                       std::to_string(config_.quorum);
      return;
    }
    stage_ = TaskStage::aggregate;
  }

  void aggregate_round(RoundReport& report) {
    int aggregated = 0;
    for (auto& n : nodes_) {
      if (n.phase != NodePhase::revealed) continue;
      if (n.excluded.contains(n.node_id) || n.verified.size() < 2) continue;
      std::vector<ResponseRecord> panel;
      for (const NodeId peer : n.verified) {
        ResponseRecord r = *node(peer).fetched;
        r.content = n.received_reveals.at(peer);
        panel.push_back(std::move(r));
      }
      std::vector<EmbeddingVector> vectors;
      if (config_.strategy != Strategy::majority) vectors = embed_panel(*config_.provider, panel);
      auto outcome = aggregate(config_.strategy, panel, vectors, n.credibility);
      n.credibility = std::move(outcome.credibility);
      n.result_digest = commit_digest(outcome.result.chosen_content);
      n.result = std::move(outcome.result);
      n.phase = NodePhase::aggregated;
      report.advanced.insert(n.node_id);
      ++aggregated;
    }
    if (aggregated < config_.quorum) {
      report.stalled = true;
      report.message = std::to_string(aggregated) + " node(s) aggregated, quorum is " + std::to_string(config_.quorum);
      return;
    }
    stage_ = TaskStage::finalize;
  }

  void finalize(RoundReport& report) {
    for (auto& sender : nodes_) {
      if (sender.phase != NodePhase::aggregated) continue;
      for (auto& receiver : nodes_) {
        if (receiver.phase != NodePhase::aggregated || receiver.excluded.contains(sender.node_id)) continue;
        if (deliver(sender.node_id, receiver.node_id))
          receiver.received_results.emplace(sender.node_id, *sender.result_digest);
      }
    }
    std::optional<NodeId> designated;
    for (auto& n : nodes_) {
      if (n.phase != NodePhase::aggregated) continue;
      int matching = 0;
      for (const auto& [_, d] : n.received_results) matching += d == *n.result_digest ? 1 : 0;
      if (matching >= config_.quorum) {
        n.phase = NodePhase::signed_off;
        report.advanced.insert(n.node_id);
        if (!designated) designated = n.node_id;
      }
    }
    if (!designated) {
      report.stalled = true;
      report.message = "no node collected " + std::to_string(config_.quorum) + " matching result digests";
      return;
    }

    const NodeState& lead = node(*designated);
    ConsensusOutcome out;
    out.task_id = task_->task_id;
    out.final_content = lead.result->chosen_content;
    out.final_digest = lead.result_digest;
    out.quorum = config_.quorum;
    for (const auto& [peer, d] : lead.received_results)
      if (d == *lead.result_digest) out.supporting_nodes.insert(peer);
    out.success = static_cast<int>(out.supporting_nodes.size()) >= config_.quorum;
    out.submitter = *designated;
    chain_.append(EventKind::data_fulfilled, out);
    chain_.append(EventKind::callback_delivered, out);
    outcome_ = std::move(out);
    stage_ = TaskStage::done;
  }

  const Corpus* corpus_;
  SimulationConfig config_;
  MockChain chain_;
  std::vector<NodeState> nodes_;
  std::optional<TaskRequest> task_;
  std::optional<ConsensusOutcome> outcome_;
  TaskStage stage_ = TaskStage::done;
  Rng drop_rng_{0};
};

}  // namespace sentetruth
