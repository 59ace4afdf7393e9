#include <gtest/gtest.h>

#include <random>
#include <set>
#include <thread>

#include "dynostore/domain/clock.hpp"
#include "dynostore/harness/simnet.hpp"
#include "dynostore/management/auth.hpp"
#include "dynostore/metadata/records.hpp"
#include "dynostore/metadata/replica.hpp"
#include "dynostore/metadata/round.hpp"
#include "dynostore/metadata/service.hpp"
#include "dynostore/metadata/transport.hpp"
#include "test_support.hpp"

namespace dynostore::metadata {
namespace {

using testing::TempDir;

ObjectDescriptor single_chunk(const std::string& path, std::int64_t created_at = 0) {
  ObjectDescriptor d;
  d.object_uuid = Uuid::random();
  d.path = ObjectPath::parse(path);
  d.size_bytes = 1;
  d.chunk_locations = {{0, Uuid::random()}};
  d.created_at = created_at;
  return d;
}

Proposal proposal(const std::string& key, Uuid base, std::int64_t wall, std::uint32_t proposer = 1) {
  return Proposal{key, base, Uuid::random(), {wall, proposer}, CreateCollection{"u", false, {}}};
}

// ---- records ----

TEST(Records, PutVersionSupersedesThePreviousHead) {
  Record r;
  auto a = single_chunk("/u/c/o", 100), b = single_chunk("/u/c/o", 250);
  apply_update(r, PutVersion{a});
  apply_update(r, PutVersion{b});
  const auto& obj = std::get<ObjectRecord>(r);
  ASSERT_EQ(obj.versions.size(), 2u);
  EXPECT_EQ(obj.head().object_uuid, b.object_uuid);
  EXPECT_EQ(obj.versions[0].superseded_at, 250);
  EXPECT_EQ(obj.versions[1].superseded_at, 0);
  EXPECT_EQ(obj.retention_days, 30u);
}

TEST(Records, PurgeNeverExpiresTheHead) {
  Record r;
  auto a = single_chunk("/u/c/o"), b = single_chunk("/u/c/o");
  apply_update(r, PutVersion{a});
  apply_update(r, PutVersion{b});
  apply_update(r, Purge{{a.object_uuid, b.object_uuid}});
  const auto& obj = std::get<ObjectRecord>(r);
  EXPECT_TRUE(obj.versions[0].expired);
  EXPECT_FALSE(obj.versions[1].expired);
}

TEST(Records, EvictClearsAndGrantsAccumulate) {
  Record r;
  apply_update(r, PutVersion{single_chunk("/u/c/o")});
  apply_update(r, Evict{});
  EXPECT_TRUE(std::holds_alternative<std::monostate>(r));
  Record acl;
  apply_update(acl, Grant{Permission{"bob", Mode::Read, ObjectPath::parse("/u/c"), false}});
  apply_update(acl, Grant{Permission{"eve", Mode::Write, ObjectPath::parse("/u/c"), true}});
  const auto& entries = std::get<AclRecord>(acl).entries;
  EXPECT_EQ(entries.size(), 2u);
  EXPECT_TRUE(entries.at("eve").deny);
}

TEST(Records, UpdatesAndRecordsSurviveJson) {
  const Update u = PutVersion{single_chunk("/u/c/o", 5)};
  const Json j = u;
  EXPECT_EQ(Json(j.get<Update>()), j);
  Record r;
  apply_update(r, u);
  const Json jr = r;
  EXPECT_EQ(jr.get<Record>(), r);

  const Update c = CreateCollection{"u", true, Uuid::random()};
  EXPECT_EQ(Json(Json(c).get<Update>()), Json(c));
  Record col;
  apply_update(col, c);
  EXPECT_EQ(std::get<CollectionRecord>(col).id, std::get<CreateCollection>(c).id);
  EXPECT_EQ(Json(col).get<Record>(), col);
}

// ---- replica ----

TEST(Replica, AcceptsFreshRejectsStale) {
  Replica r("r");
  auto p1 = proposal("k", {}, 10);
  EXPECT_EQ(r.on_propose(p1).reason, VoteReason::Accepted);
  EXPECT_EQ(r.on_commit(p1), CommitResult::Applied);
  auto stale = proposal("k", p1.update_id, 10);
  EXPECT_EQ(r.on_propose(stale).reason, VoteReason::StaleTimestamp);
  auto older = proposal("k", p1.update_id, 9, 7);
  EXPECT_EQ(r.on_propose(older).reason, VoteReason::StaleTimestamp);
  auto fresh = proposal("k", p1.update_id, 11);
  EXPECT_EQ(r.on_propose(fresh).reason, VoteReason::Accepted);
}

TEST(Replica, ProposerIdBreaksTimestampTies) {
  Replica r("r");
  auto p1 = proposal("k", {}, 10, 1);
  EXPECT_TRUE(r.on_propose(p1).accepted());
  r.on_abort(p1);
  EXPECT_EQ(r.on_propose(proposal("k", {}, 10, 1)).reason, VoteReason::StaleTimestamp);
  EXPECT_EQ(r.on_propose(proposal("k", {}, 10, 2)).reason, VoteReason::Accepted);
}

TEST(Replica, LockBlocksUntilCommitOrAbort) {
  Replica r("r");
  auto p1 = proposal("k", {}, 10);
  ASSERT_TRUE(r.on_propose(p1).accepted());
  EXPECT_TRUE(r.read("k").pending);
  EXPECT_EQ(r.on_propose(proposal("k", {}, 11)).reason, VoteReason::Locked);
  EXPECT_EQ(r.on_propose(p1).reason, VoteReason::Accepted) << "redelivery is answered again";
  r.on_abort(proposal("k", {}, 10));  // different id, same ts: ignored
  EXPECT_TRUE(r.read("k").pending);
  r.on_abort(p1);
  EXPECT_FALSE(r.read("k").pending);
  EXPECT_TRUE(r.on_propose(proposal("k", {}, 12)).accepted());
}

TEST(Replica, BaseMismatchRejected) {
  Replica r("r");
  auto p1 = proposal("k", {}, 10);
  r.on_propose(p1);
  r.on_commit(p1);
  const auto v = r.on_propose(proposal("k", Uuid::random(), 11));
  EXPECT_EQ(v.reason, VoteReason::BaseMismatch);
  EXPECT_EQ(v.head, p1.update_id);
}

TEST(Replica, CommitIsIdempotentAndChainChecked) {
  Replica r("r");
  auto p1 = proposal("k", {}, 10);
  EXPECT_EQ(r.on_commit(p1), CommitResult::Applied);
  EXPECT_EQ(r.on_commit(p1), CommitResult::Duplicate);
  EXPECT_EQ(r.log_since(0).size(), 1u);
  auto skip = proposal("k", Uuid::random(), 20);
  EXPECT_EQ(r.on_commit(skip), CommitResult::Behind);
  EXPECT_EQ(r.read("k").head, p1.update_id);
}

TEST(Replica, AbsorbCatchesUpAMissedCommit) {
  Replica a("a"), b("b");
  auto p1 = proposal("k", {}, 10);
  auto p2 = proposal("k", p1.update_id, 11);
  for (auto* r : {&a, &b}) r->on_commit(p1);
  a.on_commit(p2);
  EXPECT_EQ(b.on_commit(proposal("k", p2.update_id, 12)), CommitResult::Behind);
  EXPECT_EQ(b.absorb(a.log_since(0)), 1u);
  EXPECT_EQ(b.read("k").head, p2.update_id);
  EXPECT_EQ(b.absorb(a.log_since(0)), 0u);
}

TEST(Replica, CommitReleasesOlderLocks) {
  Replica r("r");
  auto p1 = proposal("k", {}, 10);
  r.on_propose(p1);
  auto p2 = proposal("k", {}, 11);
  EXPECT_EQ(r.on_commit(p2), CommitResult::Applied);
  EXPECT_FALSE(r.read("k").pending);
}

TEST(Replica, LeaseExpiresAbandonedLocks) {
  Replica r("r", Replica::Options{{}, std::chrono::milliseconds(5), false});
  ASSERT_TRUE(r.on_propose(proposal("k", {}, 10)).accepted());
  EXPECT_EQ(r.on_propose(proposal("k", {}, 11)).reason, VoteReason::Locked);
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  EXPECT_TRUE(r.on_propose(proposal("k", {}, 12)).accepted());
}

TEST(Replica, JournalReplayRestoresAcceptsLocksAndCommits) {
  TempDir dir;
  auto p1 = proposal("k", {}, 10);
  auto p2 = proposal("k", p1.update_id, 11);
  auto q = proposal("other", {}, 5);
  std::string before;
  {
    Replica r("r", Replica::Options{dir.path(), std::nullopt, true});
    r.on_propose(p1);
    r.on_commit(p1);
    r.on_propose(p2);  // accepted, never committed
    r.on_propose(q);
    r.on_abort(q);
    before = r.fingerprint();
  }
  Replica r("r", Replica::Options{dir.path(), std::nullopt, true});
  EXPECT_EQ(r.fingerprint(), before);
  EXPECT_EQ(r.read("k").head, p1.update_id);
  EXPECT_TRUE(r.read("k").pending);
  EXPECT_FALSE(r.read("other").pending);
  EXPECT_EQ(r.on_propose(proposal("k", p1.update_id, 11, 0)).reason, VoteReason::StaleTimestamp);
  EXPECT_EQ(r.on_commit(p2), CommitResult::Applied);
  EXPECT_EQ(r.last_seq(), 2u);
}

TEST(Replica, SnapshotTruncatesTheJournalAndRestoresTheSameState) {
  TempDir dir;
  auto p1 = proposal("k", {}, 10);
  auto p2 = proposal("k", p1.update_id, 11);
  auto q = proposal("other", {}, 5);
  std::string before;
  {
    Replica r("r", Replica::Options{dir.path(), std::nullopt, false, 4});
    r.on_propose(p1);
    r.on_commit(p1);
    r.on_propose(q);
    r.on_propose(p2);  // fourth record: snapshot, with p2 and q holding locks
    EXPECT_EQ(std::filesystem::file_size(dir.path() / "journal.jsonl"), 0u);
    r.on_abort(q);  // lands in the fresh journal
    before = r.fingerprint();
  }
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "snapshot.json"));
  Replica r("r", Replica::Options{dir.path(), std::nullopt, false, 4});
  EXPECT_EQ(r.fingerprint(), before);
  EXPECT_TRUE(r.read("k").pending);
  EXPECT_FALSE(r.read("other").pending);
  EXPECT_EQ(r.on_commit(p2), CommitResult::Applied);
  EXPECT_EQ(r.last_seq(), 2u);
}

TEST(Replica, ReplayAfterACrashBetweenSnapshotAndTruncation) {
  TempDir dir;
  auto p1 = proposal("k", {}, 10);
  auto p2 = proposal("k", p1.update_id, 11);
  std::string before;
  {
    Replica r("r", Replica::Options{dir.path(), std::nullopt, false, 0});
    r.on_propose(p1);
    r.on_commit(p1);
    r.on_propose(p2);
    before = r.fingerprint();
  }
  // A snapshot taken elsewhere from the same journal, then the journal kept.
  const auto journal = dir.path() / "journal.jsonl";
  std::filesystem::copy_file(journal, dir.path() / "journal.keep");
  { Replica("r", Replica::Options{dir.path(), std::nullopt, false, 0}).snapshot(); }
  std::filesystem::rename(dir.path() / "journal.keep", journal);
  Replica r("r", Replica::Options{dir.path(), std::nullopt, false, 0});
  EXPECT_EQ(r.fingerprint(), before);
  EXPECT_EQ(r.last_seq(), 1u);
}

TEST(Replica, CloneIsIndependent) {
  Replica r("r");
  auto p1 = proposal("k", {}, 10);
  r.on_commit(p1);
  auto copy = r.clone();
  EXPECT_EQ(copy->fingerprint(), r.fingerprint());
  copy->on_commit(proposal("k", p1.update_id, 11));
  EXPECT_NE(copy->fingerprint(), r.fingerprint());
}

TEST(ProposalRound, DecidesOnMajority) {
  ProposalRound round(proposal("k", {}, 1), 3);
  Vote yes{VoteReason::Accepted, {}, {}}, no{VoteReason::Locked, {}, {}};
  round.on_vote(0, yes);
  EXPECT_EQ(round.decision(), ProposalRound::Decision::Pending);
  round.on_vote(0, yes);
  EXPECT_EQ(round.accepts(), 1u);
  round.on_vote(1, no);
  EXPECT_EQ(round.decision(), ProposalRound::Decision::Pending);
  round.on_vote(2, yes);
  EXPECT_EQ(round.decision(), ProposalRound::Decision::Commit);

  ProposalRound lost(proposal("k", {}, 1), 3);
  lost.on_vote(0, no);
  lost.on_unreachable(1);
  EXPECT_EQ(lost.decision(), ProposalRound::Decision::Abort);
}

// ---- service ----

class ServiceTest : public ::testing::Test {
 protected:
  ServiceTest() : authority_(Bytes(32, 1), clock_) {
    std::vector<std::shared_ptr<ReplicaTransport>> transports;
    for (int i = 0; i < 3; ++i) {
      replicas_.push_back(std::make_shared<LocalTransport>(std::make_shared<Replica>("r" + std::to_string(i))));
      transports.push_back(replicas_.back());
    }
    MetadataService::Options options;
    options.lock_wait = std::chrono::milliseconds(200);
    service_ = std::make_unique<MetadataService>(transports, authority_, clock_, options);
    service_->create_namespace("UserA", token("UserA"));
    service_->create_collection(ObjectPath::parse("/UserA/c"), token("UserA"));
  }

  std::string token(const std::string& user) {
    return authority_.issue(user, {Mode::Read, Mode::Write}, std::chrono::hours(1000000)).encode();
  }
  std::string admin() { return authority_.issue("root", {Mode::Admin}, std::chrono::hours(1000000)).encode(); }
  ObjectDescriptor put(const std::string& path) {
    return service_->register_object(ObjectPath::parse(path), single_chunk(path, clock_.now_ms()), token("UserA"));
  }

  ManualClock clock_;
  management::TokenAuthority authority_;
  std::vector<std::shared_ptr<LocalTransport>> replicas_;
  std::unique_ptr<MetadataService> service_;
};

TEST_F(ServiceTest, CollectionsNest) {
  const auto t = token("UserA");
  service_->create_collection(ObjectPath::parse("/UserA/Satellite"), t);
  service_->create_collection(ObjectPath::parse("/UserA/Satellite/Region1"), t);
  EXPECT_ERRC(service_->create_collection(ObjectPath::parse("/UserA/Satellite"), t), Errc::AlreadyExists);
  EXPECT_ERRC(service_->create_collection(ObjectPath::parse("/UserA/Missing/x"), t), Errc::ParentNotFound);
  EXPECT_ERRC(service_->create_namespace("UserA", t), Errc::AlreadyExists);
  EXPECT_ERRC(service_->create_namespace("UserB", t), Errc::PermissionDenied);
}

TEST_F(ServiceTest, CollectionsResolveByIdToTheirPath) {
  const auto t = token("UserA");
  const auto sat = service_->create_collection(ObjectPath::parse("/UserA/Satellite"), t);
  const auto region = service_->create_collection(ObjectPath::parse("/UserA/Satellite/Region1"), t);
  EXPECT_NE(sat, region);
  EXPECT_EQ(service_->collection_path(region, t), ObjectPath::parse("/UserA/Satellite/Region1"));
  EXPECT_EQ(service_->collection_path(sat, t), ObjectPath::parse("/UserA/Satellite"));
  EXPECT_ERRC(service_->collection_path(Uuid::random(), t), Errc::CollectionNotFound);
  EXPECT_ERRC(service_->collection_path(sat, token("bob")), Errc::PermissionDenied);
  service_->grant({"bob", Mode::Read, ObjectPath::parse("/UserA/Satellite"), false}, t);
  EXPECT_EQ(service_->collection_path(region, token("bob")), ObjectPath::parse("/UserA/Satellite/Region1"));
}

TEST_F(ServiceTest, ReadOnlyUserCannotCreate) {
  service_->grant({"bob", Mode::Read, ObjectPath::parse("/UserA/c"), false}, token("UserA"));
  EXPECT_ERRC(service_->create_collection(ObjectPath::parse("/UserA/c/sub"), token("bob")), Errc::PermissionDenied);
  EXPECT_ERRC(put("/UserA/nope/o"), Errc::CollectionNotFound);
}

TEST_F(ServiceTest, VersionChainGrowsAndResolvesByIndex) {
  const auto v1 = put("/UserA/c/o");
  const auto v2 = put("/UserA/c/o");
  EXPECT_EQ(v1.version, 1u);
  EXPECT_EQ(v2.version, 2u);
  EXPECT_EQ(v2.version_of, v1.object_uuid);
  const auto t = token("UserA");
  EXPECT_EQ(service_->resolve(ObjectPath::parse("/UserA/c/o"), std::nullopt, t).object_uuid, v2.object_uuid);
  EXPECT_EQ(service_->resolve(ObjectPath::parse("/UserA/c/o"), 1, t).object_uuid, v1.object_uuid);
  EXPECT_EQ(service_->history(ObjectPath::parse("/UserA/c/o"), t).size(), 2u);
  EXPECT_ERRC(service_->resolve(ObjectPath::parse("/UserA/c/o"), 3, t), Errc::NotFound);
  EXPECT_ERRC(service_->resolve(ObjectPath::parse("/UserA/c/none"), std::nullopt, t), Errc::NotFound);
}

TEST_F(ServiceTest, NoMajorityMeansNoCommitAndOldVersionServed) {
  const auto v1 = put("/UserA/c/o");
  replicas_[1]->set_down(true);
  replicas_[2]->set_down(true);
  EXPECT_ERRC(put("/UserA/c/o"), Errc::ConsensusFailed);
  EXPECT_EQ(service_->resolve(ObjectPath::parse("/UserA/c/o"), std::nullopt, token("UserA")).object_uuid,
            v1.object_uuid);
  replicas_[1]->set_down(false);
  replicas_[2]->set_down(false);
  EXPECT_EQ(service_->resolve(ObjectPath::parse("/UserA/c/o"), std::nullopt, token("UserA")).object_uuid,
            v1.object_uuid);
  EXPECT_EQ(put("/UserA/c/o").version, 2u);
}

TEST_F(ServiceTest, ReadAfterWriteAcrossMinorityCrashes) {
  replicas_[0]->set_down(true);
  const auto v1 = put("/UserA/c/o");
  replicas_[0]->set_down(false);
  for (int down = 0; down < 3; ++down) {
    replicas_[down]->set_down(true);
    EXPECT_EQ(service_->resolve(ObjectPath::parse("/UserA/c/o"), std::nullopt, token("UserA")).object_uuid,
              v1.object_uuid)
        << "replica " << down << " down";
    replicas_[down]->set_down(false);
  }
  // The replica that missed the commit is repaired by the next write.
  const auto v2 = put("/UserA/c/o");
  EXPECT_EQ(replicas_[0]->replica().read(object_key(ObjectPath::parse("/UserA/c/o"))).head, v2.object_uuid);
}

TEST_F(ServiceTest, ConcurrentWritersAllLandInOneOrder) {
  constexpr int kThreads = 4, kEach = 5;
  std::vector<std::thread> threads;
  for (int t = 0; t < kThreads; ++t)
    threads.emplace_back([&] {
      for (int i = 0; i < kEach; ++i) put("/UserA/c/hot");
    });
  for (auto& t : threads) t.join();
  const auto hist = service_->history(ObjectPath::parse("/UserA/c/hot"), token("UserA"));
  ASSERT_EQ(hist.size(), static_cast<std::size_t>(kThreads * kEach));
  for (std::size_t i = 0; i < hist.size(); ++i) EXPECT_EQ(hist[i].descriptor.version, i + 1);
  const auto key = object_key(ObjectPath::parse("/UserA/c/hot"));
  const auto log0 = replicas_[0]->replica().log_for_key(key);
  for (auto& r : replicas_) {
    const auto log = r->replica().log_for_key(key);
    for (std::size_t i = 0; i < std::min(log.size(), log0.size()); ++i)
      EXPECT_EQ(log[i].proposal.update_id, log0[i].proposal.update_id);
    for (std::size_t i = 1; i < log.size(); ++i) EXPECT_LT(log[i - 1].proposal.ts, log[i].proposal.ts);
  }
}

TEST_F(ServiceTest, GarbageCollectionHonoursRetention) {
  const auto path = ObjectPath::parse("/UserA/c/o");
  const auto v1 = put("/UserA/c/o");
  clock_.advance_days(1);
  put("/UserA/c/o");
  clock_.advance_days(29);
  EXPECT_TRUE(service_->garbage_collect(clock_.now_ms(), admin()).empty());
  clock_.advance_days(2);
  const auto purged = service_->garbage_collect(clock_.now_ms(), admin());
  ASSERT_EQ(purged.size(), 1u);
  EXPECT_EQ(purged[0].object_uuid, v1.object_uuid);
  EXPECT_ERRC(service_->resolve(path, 1, token("UserA")), Errc::VersionExpired);
  clock_.advance_days(400);
  EXPECT_TRUE(service_->garbage_collect(clock_.now_ms(), admin()).empty());
  EXPECT_NO_THROW(service_->resolve(path, std::nullopt, token("UserA")));
  EXPECT_ERRC(service_->garbage_collect(clock_.now_ms(), token("UserA")), Errc::Unauthorized);
}

TEST_F(ServiceTest, LongerRetentionKeepsOldVersions) {
  put("/UserA/c/o");
  put("/UserA/c/o");
  service_->set_retention(ObjectPath::parse("/UserA/c/o"), 90, token("UserA"));
  clock_.advance_days(31);
  EXPECT_TRUE(service_->garbage_collect(clock_.now_ms(), admin()).empty());
  EXPECT_NO_THROW(service_->resolve(ObjectPath::parse("/UserA/c/o"), 1, token("UserA")));
}

TEST_F(ServiceTest, EvictReturnsLiveVersions) {
  put("/UserA/c/o");
  put("/UserA/c/o");
  EXPECT_EQ(service_->evict(ObjectPath::parse("/UserA/c/o"), token("UserA")).size(), 2u);
  EXPECT_ERRC(service_->resolve(ObjectPath::parse("/UserA/c/o"), std::nullopt, token("UserA")), Errc::NotFound);
  EXPECT_ERRC(service_->evict(ObjectPath::parse("/UserA/c/o"), token("UserA")), Errc::NotFound);
  EXPECT_EQ(put("/UserA/c/o").version, 1u);
}

TEST_F(ServiceTest, ListsLiveVersionsUnderAPrefix) {
  service_->create_collection(ObjectPath::parse("/UserA/d"), token("UserA"));
  put("/UserA/c/a");
  put("/UserA/c/b");
  put("/UserA/d/x");
  EXPECT_EQ(service_->list(ObjectPath::parse("/UserA/c"), token("UserA")).size(), 2u);
  EXPECT_EQ(service_->list(ObjectPath::parse("/UserA"), token("UserA")).size(), 3u);
}

TEST_F(ServiceTest, InheritedGrantAndNearestDenyOverride) {
  const auto t = token("UserA");
  service_->create_collection(ObjectPath::parse("/UserA/Collection1"), t);
  service_->create_collection(ObjectPath::parse("/UserA/Collection1/Sub2"), t);
  service_->grant({"bob", Mode::Read, ObjectPath::parse("/UserA/Collection1"), false}, t);
  const auto obj = ObjectPath::parse("/UserA/Collection1/Sub2/obj");
  EXPECT_TRUE(service_->check(obj, "bob", Mode::Read, t));
  EXPECT_FALSE(service_->check(obj, "bob", Mode::Write, t));
  EXPECT_TRUE(service_->check(obj, "UserA", Mode::Admin, t));
  EXPECT_FALSE(service_->check(obj, "carol", Mode::Read, t));
  service_->grant({"bob", Mode::Read, ObjectPath::parse("/UserA/Collection1/Sub2"), true}, t);
  EXPECT_FALSE(service_->check(obj, "bob", Mode::Read, t));
  EXPECT_TRUE(service_->check(ObjectPath::parse("/UserA/Collection1/x"), "bob", Mode::Read, t));
  EXPECT_ERRC(service_->grant({"bob", Mode::Read, ObjectPath::parse("/UserA/none"), false}, t), Errc::ScopeNotFound);
  EXPECT_ERRC(service_->grant({"eve", Mode::Read, ObjectPath::parse("/UserA/Collection1"), false}, token("bob")),
              Errc::PermissionDenied);
}

// Property: a grant at S reaches every descendant with no nearer entry for
// the same user, and nothing outside S.
TEST(Permissions, InheritanceProperty) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    // Random tree of depth <= 4 below /owner.
    std::vector<ObjectPath> nodes{ObjectPath::parse("/owner")};
    for (int i = 0; i < 12; ++i) {
      const ObjectPath parent = nodes[rng() % nodes.size()];
      if (parent.depth() < 5) nodes.push_back(parent.child("n" + std::to_string(i)));
    }
    std::map<std::string, KeyState> states;
    states[collection_key(nodes[0])].record = CollectionRecord{"owner", true, {}};
    std::map<std::string, std::pair<ObjectPath, AclEntry>> entries;
    for (int g = 0; g < 4; ++g) {
      const auto& scope = nodes[rng() % nodes.size()];
      AclEntry e{static_cast<Mode>(1 + rng() % 3), rng() % 4 == 0};
      entries.insert_or_assign(scope.str(), std::make_pair(scope, e));
      AclRecord acl;
      acl.entries["bob"] = e;
      states[acl_key(scope)].record = acl;
    }
    for (const auto& target : nodes) {
      EXPECT_TRUE(permits(states, target, "owner", Mode::Admin));
      EXPECT_FALSE(permits(states, target, "stranger", Mode::Read));
      // Nearest ancestor-or-self entry, found by scanning all entries.
      std::optional<std::pair<ObjectPath, AclEntry>> nearest;
      for (const auto& [name, entry] : entries) {
        const auto& scope = entry.first;
        if (scope.contains(target) && (!nearest || nearest->first.depth() < scope.depth())) nearest = entry;
      }
      for (Mode m : {Mode::Read, Mode::Write, Mode::Admin}) {
        const bool expect = nearest && !nearest->second.deny && static_cast<int>(m) <= static_cast<int>(nearest->second.mode);
        EXPECT_EQ(permits(states, target, "bob", m), expect) << target.str();
      }
    }
  }
}

// ---- simulated network ----

using harness::SimConfig;
using harness::SimEvent;
using harness::SimEventKind;
using harness::SimWorld;

std::size_t find_message(const SimWorld& w, const std::string& text) {
  const auto events = w.enabled(false, false);
  for (const auto& e : events) {
    SimWorld copy(w);
    copy.apply(e);
    if (copy.trace().back() == "deliver " + text) return e.target;
  }
  ADD_FAILURE() << "no message " << text;
  return 0;
}

void deliver(SimWorld& w, const std::string& text) { w.apply({SimEventKind::Deliver, find_message(w, text)}); }

TEST(SimNet, TwoConcurrentWritersExactlyOneWins) {
  SimConfig config{3, {{1, {100, 1}}, {2, {101, 2}}}, 0};
  SimWorld w(config);
  // p0 reaches r0, p1 reaches r1 and r2 first.
  deliver(w, "propose p0->r0");
  deliver(w, "propose p1->r1");
  deliver(w, "propose p1->r2");
  deliver(w, "propose p0->r1");
  deliver(w, "propose p0->r2");
  deliver(w, "propose p1->r0");
  w.heal();
  EXPECT_NE(w.succeeded(0), w.succeeded(1));
  EXPECT_TRUE(w.succeeded(1));
  for (std::size_t r = 0; r < 3; ++r)
    EXPECT_EQ(w.replica(r).read("o:/u/c/x").head, w.proposal(1).update_id);
}

TEST(SimNet, MinorityPartitionCannotCommit) {
  SimConfig config{3, {{1, {100, 1}}}, 2};
  SimWorld w(config);
  w.apply({SimEventKind::Crash, 1});
  w.apply({SimEventKind::Crash, 2});
  deliver(w, "propose p0->r0");
  deliver(w, "vote r0->p0 Accepted");
  EXPECT_FALSE(w.succeeded(0));
  EXPECT_EQ(w.in_flight(), 0u);
  const auto seed_head = w.read_head({0, 1, 2}, "o:/u/c/x");
  EXPECT_NE(seed_head, w.proposal(0).update_id);
  w.heal();
  EXPECT_FALSE(w.succeeded(0));
  EXPECT_EQ(w.read_head({0, 1, 2}, "o:/u/c/x"), seed_head);
}

TEST(SimNet, CrashBetweenAcceptAndCommitConvergesAfterRestart) {
  SimConfig config{3, {{1, {100, 1}}}, 1};
  SimWorld w(config);
  for (int r = 0; r < 3; ++r) deliver(w, "propose p0->r" + std::to_string(r));
  w.apply({SimEventKind::Crash, 2});
  for (int r = 0; r < 3; ++r) deliver(w, "vote r" + std::to_string(r) + "->p0 Accepted");
  deliver(w, "commit p0->r0");
  deliver(w, "commit p0->r1");
  deliver(w, "ack r0->p0 Applied");
  deliver(w, "ack r1->p0 Applied");
  EXPECT_TRUE(w.succeeded(0));
  EXPECT_TRUE(w.replica(2).read("o:/u/c/x").pending) << "crashed replica still holds the lock";
  w.apply({SimEventKind::Restart, 2});
  EXPECT_EQ(w.replica(2).read("o:/u/c/x").head, w.proposal(0).update_id);
  EXPECT_FALSE(w.replica(2).read("o:/u/c/x").pending);
  w.heal();
}

TEST(SimNet, DuplicatedCommitsAreHarmless) {
  SimConfig config{3, {{1, {100, 1}}}, 0};
  SimWorld w(config);
  for (int r = 0; r < 3; ++r) deliver(w, "propose p0->r" + std::to_string(r));
  for (int r = 0; r < 3; ++r) deliver(w, "vote r" + std::to_string(r) + "->p0 Accepted");
  const auto idx = find_message(w, "commit p0->r0");
  w.apply({SimEventKind::Duplicate, idx});
  deliver(w, "commit p0->r0");
  deliver(w, "commit p0->r0");
  w.heal();
  EXPECT_EQ(w.replica(0).log_for_key("o:/u/c/x").size(), 2u);
}

TEST(SimNet, ExplorerFindsViolationsInABrokenProtocol) {
  SimConfig broken{3, {{1, {100, 1}}, {2, {101, 2}}}, 0, 1};
  const auto report = harness::explore_exhaustive(broken, 6);
  EXPECT_GT(report.violations, 0u);
  EXPECT_FALSE(report.violation.empty());
  EXPECT_FALSE(report.violation_message.empty());
}

TEST(SimNet, StandardConfigurationsAreSafeAtDepthFive) {
  for (const auto& config : harness::standard_configurations()) {
    const auto report = harness::explore_exhaustive(config, 5);
    EXPECT_EQ(report.violations, 0u) << report.violation_message;
    EXPECT_GT(report.exhaustive_states, 100u);
  }
}

TEST(SimNet, RandomSchedulesAreDeterministicPerSeed) {
  const auto a = harness::explore_random(50, 30, 5), b = harness::explore_random(50, 30, 5);
  EXPECT_EQ(a.violations, 0u) << a.violation_message;
  EXPECT_EQ(a.random_events, b.random_events);
  EXPECT_EQ(a.committed_writes, b.committed_writes);
}

}  // namespace
}  // namespace dynostore::metadata
