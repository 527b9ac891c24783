# RISNet backend: network models, channel library, optimizers and experiment harness
