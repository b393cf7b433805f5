#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "apklab/errors.hpp"
#include "apklab/fsdiff.hpp"
#include "apklab/hashing.hpp"
#include "apklab/textutil.hpp"
#include "support/fsoracle.hpp"
#include "support/testutil.hpp"

using namespace apklab;
namespace fs = std::filesystem;

namespace {

ManifestEntry file_entry(std::string path, const std::string& content,
                         std::string mode = "0644") {
    ManifestEntry e;
    e.path = std::move(path);
    e.kind = "file";
    e.size = content.size();
    e.sha256 = sha256_hex(content);
    e.mode = std::move(mode);
    return e;
}

ManifestEntry dir_entry(std::string path, std::string mode = "0755") {
    ManifestEntry e;
    e.path = std::move(path);
    e.kind = "dir";
    e.mode = std::move(mode);
    return e;
}

}  // namespace

TEST_CASE("manifest lines and files round-trip") {
    SnapshotManifest m;
    m.entries.push_back(dir_entry("/data"));
    m.entries.push_back(file_entry("/data/a.xml", "<map/>", "0660"));
    ManifestEntry link;
    link.path = "/data/link";
    link.kind = "symlink";
    link.mode = "0777";
    link.target = "/data/a.xml";
    m.entries.push_back(link);

    testsupport::TempDir tmp;
    fs::path file = tmp.path() / "m.manifest";
    write_manifest(file, m);
    SnapshotManifest back = read_manifest(file);
    REQUIRE(back.entries.size() == 3);
    CHECK(back.entries == m.entries);

    // Each line is one standalone JSON object.
    auto lines = split(read_file(file), '\n');
    CHECK(lines.size() == 4);  // trailing newline
    CHECK(manifest_entry_to_line(m.entries[1]).find("\"sha256\"") != std::string::npos);
}

TEST_CASE("manifest invariants are enforced on read and write") {
    testsupport::TempDir tmp;
    fs::path file = tmp.path() / "bad.manifest";

    SnapshotManifest unsorted_dup;
    unsorted_dup.entries.push_back(file_entry("/a", "x"));
    unsorted_dup.entries.push_back(file_entry("/a", "y"));
    CHECK_THROWS_WITH_AS(write_manifest(file, unsorted_dup),
                         doctest::Contains("not sorted/unique"), ParseError);

    write_file(file, "{\"path\":\"/f\",\"kind\":\"file\",\"mode\":\"0644\"}\n");
    CHECK_THROWS_WITH_AS(read_manifest(file), doctest::Contains("file entry without digest"),
                         ParseError);

    write_file(file, "not json\n");
    CHECK_THROWS_WITH_AS(read_manifest(file), doctest::Contains("line 1"), ParseError);
}

TEST_CASE("snapshot_tree walks a real directory") {
    testsupport::TempDir tmp;
    fs::create_directories(tmp.path() / "sub");
    write_file(tmp.path() / "a.txt", "x");
    write_file(tmp.path() / "sub/b.bin", std::string("\0\x01\x02", 3));
    fs::create_symlink("a.txt", tmp.path() / "link");

    SnapshotManifest m = snapshot_tree(tmp.path());
    REQUIRE(m.entries.size() == 4);
    CHECK(m.entries[0].path == "/a.txt");
    CHECK(m.entries[1].path == "/link");
    CHECK(m.entries[2].path == "/sub");
    CHECK(m.entries[3].path == "/sub/b.bin");

    CHECK(m.entries[0].kind == "file");
    CHECK(m.entries[0].size == 1);
    CHECK(m.entries[0].sha256 ==
          "2d711642b726b04401627ca9fbac32f5c8530fb1903cc4db02258717921a4881");

    CHECK(m.entries[1].kind == "symlink");
    CHECK(m.entries[1].target == "a.txt");

    CHECK(m.entries[2].kind == "dir");
    CHECK(m.entries[2].sha256.empty());

    CHECK(m.entries[3].size == 3);
    CHECK(m.entries[3].sha256 == sha256_hex(std::string("\0\x01\x02", 3)));

    // A tree diffed against itself is clean.
    CHECK(testsupport::diff_empty(diff_manifests(m, m)));
}

TEST_CASE("created files are reported exactly") {
    SnapshotManifest pre;
    pre.entries.push_back(dir_entry("/data"));
    pre.entries.push_back(dir_entry("/data/data"));
    pre.entries.push_back(dir_entry("/data/data/t4t.power.management"));
    pre.entries.push_back(dir_entry("/data/data/t4t.power.management/shared_prefs"));

    SnapshotManifest post = pre;
    post.entries.push_back(
        file_entry("/data/data/t4t.power.management/shared_prefs/carrier.xml", "a"));
    post.entries.push_back(
        file_entry("/data/data/t4t.power.management/shared_prefs/phone.xml", "b"));
    post.entries.push_back(file_entry(
        "/data/data/t4t.power.management/shared_prefs/t4t.power.management_preferences.xml",
        "c"));

    FsDiff d = diff_manifests(pre, post);
    CHECK(d.created ==
          std::vector<std::string>{
              "/data/data/t4t.power.management/shared_prefs/carrier.xml",
              "/data/data/t4t.power.management/shared_prefs/phone.xml",
              "/data/data/t4t.power.management/shared_prefs/"
              "t4t.power.management_preferences.xml"});
    CHECK(d.deleted.empty());
    CHECK(d.modified.empty());
    CHECK(d.mode_changed.empty());
}

TEST_CASE("modified entries carry both content identities") {
    SnapshotManifest pre, post;
    pre.entries.push_back(file_entry("/f", "old"));
    post.entries.push_back(file_entry("/f", "new"));

    FsDiff d = diff_manifests(pre, post);
    REQUIRE(d.modified.size() == 1);
    CHECK(d.modified[0].path == "/f");
    CHECK(d.modified[0].pre_sha256 == sha256_hex("old"));
    CHECK(d.modified[0].post_sha256 == sha256_hex("new"));
}

TEST_CASE("a symlink retarget is a modification") {
    SnapshotManifest pre, post;
    ManifestEntry a;
    a.path = "/l";
    a.kind = "symlink";
    a.mode = "0777";
    a.target = "/old";
    ManifestEntry b = a;
    b.target = "/new";
    pre.entries.push_back(a);
    post.entries.push_back(b);

    FsDiff d = diff_manifests(pre, post);
    REQUIRE(d.modified.size() == 1);
    CHECK(d.modified[0].pre_sha256 == "/old");
    CHECK(d.modified[0].post_sha256 == "/new");
}

TEST_CASE("a kind change is a modification") {
    SnapshotManifest pre, post;
    pre.entries.push_back(dir_entry("/p"));
    post.entries.push_back(file_entry("/p", "now a file"));
    FsDiff d = diff_manifests(pre, post);
    REQUIRE(d.modified.size() == 1);
    CHECK(d.created.empty());
    CHECK(d.deleted.empty());
}

TEST_CASE("mode changes are reported independently of content") {
    SnapshotManifest pre, post;
    pre.entries.push_back(file_entry("/same", "data", "0644"));
    post.entries.push_back(file_entry("/same", "data", "4755"));

    FsDiff mode_only = diff_manifests(pre, post);
    CHECK(mode_only.modified.empty());
    REQUIRE(mode_only.mode_changed.size() == 1);
    CHECK(mode_only.mode_changed[0].pre_mode == "0644");
    CHECK(mode_only.mode_changed[0].post_mode == "4755");

    SnapshotManifest post2;
    post2.entries.push_back(file_entry("/same", "rewritten", "4755"));
    FsDiff both = diff_manifests(pre, post2);
    CHECK(both.modified.size() == 1);
    CHECK(both.mode_changed.size() == 1);
}

TEST_CASE("error entries are invisible to the diff") {
    SnapshotManifest pre, post;
    ManifestEntry err;
    err.path = "/ghost";
    err.kind = "error";
    pre.entries.push_back(err);
    post.entries.push_back(file_entry("/ghost", "content"));

    FsDiff d = diff_manifests(pre, post);
    CHECK(d.created == std::vector<std::string>{"/ghost"});

    FsDiff r = diff_manifests(post, pre);
    CHECK(r.deleted == std::vector<std::string>{"/ghost"});
    CHECK(r.created.empty());
}

TEST_CASE("500 random pairs match the naive oracle with clean symmetry") {
    std::mt19937 rng(987654);
    for (int i = 0; i < 500; ++i) {
        SnapshotManifest pre = testsupport::random_manifest(rng);
        SnapshotManifest post = testsupport::perturb_manifest(pre, rng);

        FsDiff got = diff_manifests(pre, post);
        FsDiff want = testsupport::naive_diff(pre, post);
        REQUIRE(testsupport::diff_equal(got, want));

        // Identity.
        REQUIRE(testsupport::diff_empty(diff_manifests(pre, pre)));
        REQUIRE(testsupport::diff_empty(diff_manifests(post, post)));

        // Swapping arguments swaps created/deleted and flips pairs.
        FsDiff rev = diff_manifests(post, pre);
        REQUIRE(rev.created == got.deleted);
        REQUIRE(rev.deleted == got.created);
        REQUIRE(rev.modified.size() == got.modified.size());
        for (std::size_t k = 0; k < rev.modified.size(); ++k) {
            REQUIRE(rev.modified[k].path == got.modified[k].path);
            REQUIRE(rev.modified[k].pre_sha256 == got.modified[k].post_sha256);
            REQUIRE(rev.modified[k].post_sha256 == got.modified[k].pre_sha256);
        }

        // created/deleted/modified are pairwise disjoint.
        for (const auto& mod : got.modified) {
            REQUIRE(std::find(got.created.begin(), got.created.end(), mod.path) ==
                    got.created.end());
            REQUIRE(std::find(got.deleted.begin(), got.deleted.end(), mod.path) ==
                    got.deleted.end());
        }
        for (const auto& c : got.created) {
            REQUIRE(std::find(got.deleted.begin(), got.deleted.end(), c) == got.deleted.end());
        }
    }
}
