import { describe, expect, it } from 'vitest';

import { overlayStyle, scaleBbox } from '../src/overlay.js';

describe('scaleBbox', () => {
  it('halves coordinates when rendered at half size', () => {
    const rect = scaleBbox([100, 200, 300, 260], 750, 1000, 375, 500);
    expect(rect).toEqual({ left: 50, top: 100, width: 100, height: 30 });
  });

  it('is identity at natural size', () => {
    const rect = scaleBbox([10, 20, 110, 45], 750, 1000, 750, 1000);
    expect(rect).toEqual({ left: 10, top: 20, width: 100, height: 25 });
  });

  it('handles anisotropic rendering', () => {
    const rect = scaleBbox([0, 0, 750, 1000], 750, 1000, 300, 800);
    expect(rect).toEqual({ left: 0, top: 0, width: 300, height: 800 });
  });

  it('scales up as well as down', () => {
    const rect = scaleBbox([10, 10, 20, 20], 100, 100, 400, 400);
    expect(rect).toEqual({ left: 40, top: 40, width: 40, height: 40 });
  });

  it('rejects degenerate natural sizes', () => {
    expect(() => scaleBbox([0, 0, 1, 1], 0, 100, 10, 10)).toThrow();
  });
});

describe('overlayStyle', () => {
  it('emits pixel CSS', () => {
    expect(overlayStyle({ left: 50, top: 100.456, width: 10, height: 5 })).toBe(
      'left:50px;top:100.46px;width:10px;height:5px',
    );
  });
});
