# Harness package: scenario synthesis, seeded sweeps and the command line
