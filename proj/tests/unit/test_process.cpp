#include <gtest/gtest.h>

#include "perfagent/process.hpp"
#include "support/support.hpp"

using namespace perfagent;

TEST(Process, CapturesOutputAndExitCode) {
    auto r = run_process({{"sh", "-c", "echo out; echo err >&2; exit 3"}});
    EXPECT_EQ(r.out, "out\n");
    EXPECT_EQ(r.err, "err\n");
    EXPECT_EQ(r.exit_code, 3);
    EXPECT_FALSE(r.ok());
    EXPECT_FALSE(r.timed_out);
}

TEST(Process, EnvironmentOverrideAndWorkingDir) {
    testsupport::TempDir dir("proc");
    ProcessRequest req{{"sh", "-c", "printf '%s %s' \"$FOO\" \"$(pwd)\""}};
    req.env_overrides["FOO"] = "bar";
    req.working_dir = dir.path();
    auto r = run_process(req);
    EXPECT_TRUE(r.ok());
    EXPECT_EQ(r.out, "bar " + fs::canonical(dir.path()).string());
}

TEST(Process, StdinFile) {
    testsupport::TempDir dir("proc-in");
    testsupport::spit(dir.path() / "in.txt", "hello\n");
    ProcessRequest req{{"cat"}};
    req.stdin_file = dir.path() / "in.txt";
    EXPECT_EQ(run_process(req).out, "hello\n");
}

TEST(Process, TimeoutKillsProcessGroup) {
    ProcessRequest req{{"sh", "-c", "sleep 5 & sleep 5; echo done"}};
    req.timeout = std::chrono::milliseconds(200);
    auto r = run_process(req);
    EXPECT_TRUE(r.timed_out);
    EXPECT_LT(r.wall_s, 3.0);
    EXPECT_EQ(r.out, "");
}

TEST(Process, SignalReported) {
    auto r = run_process({{"sh", "-c", "kill -SEGV $$"}});
    EXPECT_TRUE(r.signaled);
    EXPECT_EQ(r.term_signal, SIGSEGV);
}

TEST(Process, MissingToolThrows) {
    EXPECT_THROW(run_process({{"definitely-not-a-tool-xyz"}}), ToolNotFound);
    EXPECT_FALSE(find_executable("definitely-not-a-tool-xyz"));
    EXPECT_TRUE(find_executable("sh"));
}

TEST(Process, ShellQuoting) {
    EXPECT_EQ(shell_quote_join({"gcc", "-O2", "a b.c", "it's"}), "gcc -O2 'a b.c' 'it'\\''s'");
}
