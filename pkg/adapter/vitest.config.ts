import { defineConfig } from 'vitest/config';

// Training tests run a real (toy) network on the CPU backend; give them room.
export default defineConfig({
  test: {
    testTimeout: 600_000,
    hookTimeout: 600_000,
    // keep the timed protocol checks off the same cores as training
    fileParallelism: false,
  },
});
