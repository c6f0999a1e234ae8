"""Reference implementation of the mock backend image, for cross-checking.

Prints the SHA-256 of the raw RGB pixels for ("sunset", seed 1, 64x64)."""
import hashlib, struct
M=2**64-1
def fnv(b, st=0xcbf29ce484222325):
    for x in b:
        st ^= x; st = (st*0x100000001b3)&M
    return st
def mix(z):
    z=((z^(z>>30))*0xbf58476d1ce4e5b9)&M
    z=((z^(z>>27))*0x94d049bb133111eb)&M
    return z^(z>>31)
def cu(k,c): return mix((k+((c+1)*0x9e3779b97f4a7c15))&M)
def cf(k,c): return (cu(k,c)>>11)/float(1<<53)
def img(prompt,seed,w,h):
    key=fnv(struct.pack('<Q',seed), fnv(prompt.encode()))
    col=lambda v:[v&255,(v>>8)&255,(v>>16)&255]
    a=col(cu(key,0)); b=col(cu(key,1))
    dx=cf(key,2)*2-1; dy=cf(key,3)*2-1
    l=(dx*dx+dy*dy)**0.5
    dx/=l; dy/=l
    ext=0.5*(abs(dx)+abs(dy))
    lat=lambda gx,gy: cf(key,16+((gy<<32)|gx))*2-1
    out=bytearray()
    for y in range(h):
        v=(y+0.5)/h-0.5; gy=y//8; fy=(y%8)/8
        for x in range(w):
            u=(x+0.5)/w-0.5
            s=min(max((u*dx+v*dy)/ext*0.5+0.5,0.0),1.0)
            s=s*s*(3-2*s)
            gx=x//8; fx=(x%8)/8
            top=lat(gx,gy)*(1-fx)+lat(gx+1,gy)*fx
            bot=lat(gx,gy+1)*(1-fx)+lat(gx+1,gy+1)*fx
            n=12*(top*(1-fy)+bot*fy)
            for c in range(3):
                val=a[c]*(1-s)+b[c]*s+n
                r=float(round(val)) if abs(val-int(val))!=0.5 else float(int(val)+ (1 if val>0 else -1))
                out.append(int(min(max(r,0),255)))
    return bytes(out)
print(hashlib.sha256(img("sunset",1,64,64)).hexdigest())
