package com.fixture.alpha;

import java.net.URL;
import java.security.cert.X509Certificate;
import javax.net.ssl.X509TrustManager;

public class Net {
    public URL endpoint(String host) throws Exception {
        return new URL("http://" + host + "/api");
    }

    static class TrustEverything implements X509TrustManager {
        public final void checkServerTrusted(X509Certificate[] chain, String authType) {
        }

        public void checkClientTrusted(X509Certificate[] chain, String authType) {
            Audit.record(chain);
        }

        public X509Certificate[] getAcceptedIssuers() {
            return new X509Certificate[0];
        }
    }
}
