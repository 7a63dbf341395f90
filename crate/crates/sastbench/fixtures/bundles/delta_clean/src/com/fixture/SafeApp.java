package com.fixture.delta;

import android.content.Context;
import android.database.Cursor;
import android.database.sqlite.SQLiteDatabase;
import android.webkit.WebView;
import java.net.URL;
import java.security.cert.CertificateException;
import java.security.cert.X509Certificate;
import javax.crypto.Cipher;
import javax.net.ssl.X509TrustManager;

public class SafeApp {
    void persist(Context ctx, String name, byte[] payload) throws Exception {
        ctx.openFileOutput(name, Context.MODE_PRIVATE).write(payload);
    }

    Cursor lookup(SQLiteDatabase db, String user) {
        return db.rawQuery("SELECT * FROM accounts WHERE owner = ?", new String[] { user });
    }

    Cipher cipher() throws Exception {
        return Cipher.getInstance("AES/GCM/NoPadding");
    }

    void browse(WebView view) {
        view.getSettings().setJavaScriptEnabled(false);
        view.getSettings().setAllowFileAccess(false);
    }

    URL endpoint(String host) throws Exception {
        return new URL("https://" + host + "/api");
    }

    static class PinnedTrust implements X509TrustManager {
        public void checkServerTrusted(X509Certificate[] chain, String authType)
                throws CertificateException {
            Pinning.verify(chain, authType);
        }

        public void checkClientTrusted(X509Certificate[] chain, String authType)
                throws CertificateException {
            Pinning.verify(chain, authType);
        }

        public X509Certificate[] getAcceptedIssuers() {
            return new X509Certificate[0];
        }
    }
}
