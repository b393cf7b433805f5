#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "apklab/fsdiff.hpp"
#include "apklab/hashing.hpp"

namespace testsupport {

// Naive set-comparison diff: plain loops and linear lookups, no shared code
// with the production differ. Content identity: digest+size for files,
// target for symlinks, the kind itself for dirs; a kind change is a
// modification. Entries of kind "error" are invisible.
inline apklab::FsDiff naive_diff(const apklab::SnapshotManifest& pre,
                                 const apklab::SnapshotManifest& post) {
    using apklab::ManifestEntry;
    auto visible = [](const ManifestEntry& e) { return e.kind != "error"; };
    auto find_in = [&](const apklab::SnapshotManifest& m,
                       const std::string& path) -> const ManifestEntry* {
        for (const auto& e : m.entries)
            if (e.path == path && e.kind != "error") return &e;
        return nullptr;
    };
    auto identity = [](const ManifestEntry& e) {
        if (e.kind == "file") return e.sha256 + ":" + std::to_string(e.size);
        if (e.kind == "symlink") return e.target;
        return e.kind;
    };
    auto shown = [](const ManifestEntry& e) {
        return e.kind == "symlink" ? e.target : e.sha256;
    };

    apklab::FsDiff d;
    for (const auto& e : post.entries) {
        if (visible(e) && !find_in(pre, e.path)) d.created.push_back(e.path);
    }
    for (const auto& b : pre.entries) {
        if (!visible(b)) continue;
        const ManifestEntry* a = find_in(post, b.path);
        if (!a) {
            d.deleted.push_back(b.path);
            continue;
        }
        if (b.kind != a->kind || identity(b) != identity(*a)) {
            d.modified.push_back({b.path, shown(b), shown(*a)});
        }
        if (b.mode != a->mode) d.mode_changed.push_back({b.path, b.mode, a->mode});
    }
    std::sort(d.created.begin(), d.created.end());
    std::sort(d.deleted.begin(), d.deleted.end());
    std::sort(d.modified.begin(), d.modified.end(),
              [](const auto& x, const auto& y) { return x.path < y.path; });
    std::sort(d.mode_changed.begin(), d.mode_changed.end(),
              [](const auto& x, const auto& y) { return x.path < y.path; });
    return d;
}

inline bool diff_equal(const apklab::FsDiff& a, const apklab::FsDiff& b) {
    if (a.created != b.created || a.deleted != b.deleted) return false;
    if (a.modified.size() != b.modified.size()) return false;
    for (std::size_t i = 0; i < a.modified.size(); ++i) {
        if (a.modified[i].path != b.modified[i].path ||
            a.modified[i].pre_sha256 != b.modified[i].pre_sha256 ||
            a.modified[i].post_sha256 != b.modified[i].post_sha256)
            return false;
    }
    if (a.mode_changed.size() != b.mode_changed.size()) return false;
    for (std::size_t i = 0; i < a.mode_changed.size(); ++i) {
        if (a.mode_changed[i].path != b.mode_changed[i].path ||
            a.mode_changed[i].pre_mode != b.mode_changed[i].pre_mode ||
            a.mode_changed[i].post_mode != b.mode_changed[i].post_mode)
            return false;
    }
    return true;
}

inline bool diff_empty(const apklab::FsDiff& d) {
    return d.created.empty() && d.deleted.empty() && d.modified.empty() &&
           d.mode_changed.empty();
}

// Random manifest over a fixed path pool; sorted unique paths, consistent
// entry shape per kind.
inline apklab::SnapshotManifest random_manifest(std::mt19937& rng) {
    using apklab::ManifestEntry;
    static const std::vector<std::string> kPaths = [] {
        std::vector<std::string> v;
        for (const char* base : {"/system/bin", "/system/app", "/data/data/com.a",
                                 "/data/data/com.b/files", "/sdcard"}) {
            for (int i = 0; i < 6; ++i)
                v.push_back(std::string(base) + "/f" + std::to_string(i));
        }
        return v;
    }();
    static const std::vector<std::string> kModes = {"0644", "0755", "0600", "4755"};
    static const std::vector<std::string> kKinds = {"file", "file", "dir", "symlink", "error"};

    apklab::SnapshotManifest m;
    for (const std::string& path : kPaths) {
        if (rng() % 3 == 0) continue;  // absent
        ManifestEntry e;
        e.path = path;
        e.kind = kKinds[rng() % kKinds.size()];
        e.mode = kModes[rng() % kModes.size()];
        if (e.kind == "file") {
            std::string content = "c" + std::to_string(rng() % 8);
            e.size = content.size();
            e.sha256 = apklab::sha256_hex(content);
        } else if (e.kind == "symlink") {
            e.target = "/system/bin/t" + std::to_string(rng() % 4);
        }
        m.entries.push_back(std::move(e));
    }
    return m;
}

// Perturbs `base` into a plausible "post" snapshot: drops, adds, rewrites,
// chmods, and kind flips, each with independent probability.
inline apklab::SnapshotManifest perturb_manifest(const apklab::SnapshotManifest& base,
                                                 std::mt19937& rng) {
    apklab::SnapshotManifest out;
    for (const auto& e : base.entries) {
        if (rng() % 8 == 0) continue;  // deleted
        apklab::ManifestEntry n = e;
        if (n.kind == "file" && rng() % 4 == 0) {
            std::string content = "w" + std::to_string(rng() % 8);
            n.size = content.size();
            n.sha256 = apklab::sha256_hex(content);
        }
        if (rng() % 6 == 0) n.mode = n.mode == "0644" ? "0600" : "0644";
        if (rng() % 10 == 0) {
            n.kind = n.kind == "dir" ? "file" : "dir";
            if (n.kind == "file") {
                n.size = 1;
                n.sha256 = apklab::sha256_hex("k");
            } else {
                n.size = 0;
                n.sha256.clear();
            }
        }
        out.entries.push_back(std::move(n));
    }
    for (int i = 0; i < 3; ++i) {
        if (rng() % 2 == 0) continue;
        apklab::ManifestEntry n;
        n.path = "/data/local/tmp/new" + std::to_string(rng() % 16);
        n.kind = "file";
        n.mode = "0644";
        std::string content = "n" + std::to_string(rng() % 8);
        n.size = content.size();
        n.sha256 = apklab::sha256_hex(content);
        bool dup = false;
        for (const auto& e : out.entries) dup = dup || e.path == n.path;
        if (!dup) out.entries.push_back(std::move(n));
    }
    std::sort(out.entries.begin(), out.entries.end(),
              [](const auto& a, const auto& b) { return a.path < b.path; });
    return out;
}

}  // namespace testsupport
